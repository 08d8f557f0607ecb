#pragma once

#include "except.hpp"
#include "sh.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sphmimo {

enum class SchemeKind { gaussian, nearly_uniform, custom };

struct SamplingScheme {
    SchemeKind kind = SchemeKind::custom;
    std::vector<Direction> directions;
    std::vector<double> weights; // quadrature weights; gaussian only
    int exact_order = -1;        // gaussian only

    int size() const { return static_cast<int>(directions.size()); }
};

struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// P_count(x) and its derivative.
inline std::pair<double, double> legendre_with_derivative(int count, double x) {
    double p0 = 1.0, p1 = x;
    for (int n = 2; n <= count; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
    }
    return {p1, count * (x * p1 - p0) / (x * x - 1.0)};
}

} // namespace detail

// Nodes in descending order on [-1, 1], found by Newton iteration.
inline GaussLegendre gauss_legendre(int count) {
    GaussLegendre gl;
    gl.nodes.resize(static_cast<std::size_t>(count));
    gl.weights.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double x = std::cos(pi * (i + 0.75) / (count + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = detail::legendre_with_derivative(count, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = detail::legendre_with_derivative(count, x).second;
        gl.nodes[static_cast<std::size_t>(i)] = x;
        gl.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return gl;
}

// (N+1) Gauss-Legendre rings times 2(N+1) equiangular azimuths.
inline SamplingScheme make_gaussian_grid(int N) {
    if (N < 0) throw PreconditionError("grid order must be non-negative");
    const auto gl = gauss_legendre(N + 1);
    SamplingScheme s;
    s.kind = SchemeKind::gaussian;
    s.exact_order = N;
    const int naz = 2 * (N + 1);
    for (int i = 0; i <= N; ++i) {
        const double theta = std::acos(gl.nodes[static_cast<std::size_t>(i)]);
        for (int j = 0; j < naz; ++j) {
            s.directions.push_back(Direction::make(theta, pi * j / (N + 1)));
            s.weights.push_back(gl.weights[static_cast<std::size_t>(i)] * pi / (N + 1));
        }
    }
    return s;
}

// Fibonacci spiral with both poles included; count = 1 is the north pole.
inline SamplingScheme make_uniform_grid(int count) {
    if (count < 1) throw PreconditionError("uniform grid needs at least one point");
    SamplingScheme s;
    s.kind = SchemeKind::nearly_uniform;
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < count; ++i) {
        const double z = count == 1 ? 1.0 : 1.0 - 2.0 * i / (count - 1.0);
        s.directions.push_back(Direction::make(std::acos(std::clamp(z, -1.0, 1.0)), 2.0 * pi * i / golden));
    }
    return s;
}

inline SamplingScheme parse_scheme_csv(std::istream& in, const std::string& source = "<stream>") {
    SamplingScheme s;
    s.kind = SchemeKind::custom;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!header) {
            std::string compact;
            for (char c : line)
                if (c != ' ' && c != '\t') compact += c;
            if (compact != "theta_deg,phi_deg")
                throw ConfigError(source + ":" + std::to_string(lineno) + ": expected header 'theta_deg,phi_deg'");
            header = true;
            continue;
        }
        std::istringstream row(line);
        std::string a, b, extra;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || std::getline(row, extra, ','))
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected two comma-separated values");
        double t = 0.0, p = 0.0;
        try {
            std::size_t used = 0;
            t = std::stod(a, &used);
            p = std::stod(b);
        } catch (const std::exception&) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": not a number");
        }
        if (!(t >= 0.0 && t <= 180.0) || !std::isfinite(p))
            throw ConfigError(source + ":" + std::to_string(lineno) + ": theta_deg must lie in [0, 180]");
        s.directions.push_back(Direction::from_degrees(t, p));
    }
    if (!header) throw ConfigError(source + ": missing header 'theta_deg,phi_deg'");
    if (s.directions.empty()) throw ConfigError(source + ": no element directions");
    return s;
}

inline SamplingScheme load_scheme_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open layout file " + path);
    return parse_scheme_csv(in, path);
}

// SLA elements see y^T, SMA elements see y^H.
enum class ElementBasis { plain, conjugate };

inline Eigen::MatrixXcd element_basis(std::span<const Direction> dirs, int N, ElementBasis basis) {
    Eigen::MatrixXcd Y = sh_matrix(dirs, N);
    if (basis == ElementBasis::conjugate) Y = Y.conjugate().eval();
    return Y;
}

struct SamplingMatrices {
    int order = 0;
    int order_tilde = 0;
    ElementBasis basis = ElementBasis::plain;
    Eigen::MatrixXcd alpha;   // (N+1)^2 x E
    Eigen::MatrixXcd epsilon; // (N+1)^2 x [(Ñ+1)^2 - (N+1)^2]
    Eigen::MatrixXcd element_basis; // E x (Ñ+1)^2, the matrix alpha was built against
    double identity_residual = 0.0;
};

namespace detail {

inline double identity_residual(const Eigen::MatrixXcd& alpha, const Eigen::MatrixXcd& low) {
    const Eigen::MatrixXcd p = alpha * low;
    return (p - Eigen::MatrixXcd::Identity(p.rows(), p.cols())).cwiseAbs().maxCoeff();
}

} // namespace detail

inline SamplingMatrices compute_sampling_matrices(const SamplingScheme& scheme, int N, int N_tilde,
                                                  ElementBasis basis = ElementBasis::plain) {
    if (N < 0 || N_tilde < N) throw PreconditionError("need 0 <= N <= N_tilde");
    const int L = sh_count(N);
    if (L > scheme.size())
        throw RankDeficiencyError("order " + std::to_string(N) + " needs at least " + std::to_string(L) +
                                  " elements, layout has " + std::to_string(scheme.size()));
    SamplingMatrices out;
    out.order = N;
    out.order_tilde = N_tilde;
    out.basis = basis;
    out.element_basis = element_basis(scheme.directions, N_tilde, basis);
    const Eigen::MatrixXcd low = out.element_basis.leftCols(L);

    if (scheme.kind == SchemeKind::gaussian && scheme.exact_order >= N) {
        const Eigen::Map<const Eigen::VectorXd> w(scheme.weights.data(), static_cast<Eigen::Index>(scheme.weights.size()));
        out.alpha = low.adjoint() * w.asDiagonal();
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(low, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv.size() < L || sv[L - 1] <= 1e-10 * sv[0])
            throw RankDeficiencyError("element layout cannot resolve SH order " + std::to_string(N));
        out.alpha = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    }
    out.epsilon = out.alpha * out.element_basis.rightCols(out.element_basis.cols() - L);
    out.identity_residual = detail::identity_residual(out.alpha, low);
    return out;
}

// Keeps the first (Ň+1)^2 rows of alpha; orders above Ň join the aliased block.
inline SamplingMatrices truncate_alpha(const SamplingMatrices& mats, int N_check) {
    if (N_check < 0 || N_check > mats.order) throw PreconditionError("truncation order must lie in [0, N]");
    if (N_check == mats.order) return mats;
    const int L = sh_count(N_check);
    SamplingMatrices out;
    out.order = N_check;
    out.order_tilde = mats.order_tilde;
    out.basis = mats.basis;
    out.element_basis = mats.element_basis;
    out.alpha = mats.alpha.topRows(L);
    out.epsilon = out.alpha * out.element_basis.rightCols(out.element_basis.cols() - L);
    out.identity_residual = detail::identity_residual(out.alpha, out.element_basis.leftCols(L));
    return out;
}

} // namespace sphmimo
