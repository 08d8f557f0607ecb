#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sphmimo {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

constexpr double deg2rad(double d) { return d * pi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / pi; }

using Vec3 = std::array<double, 3>;

// theta is the polar (elevation) angle from +z, phi the azimuth from +x.
struct Direction {
    double theta = 0.0;
    double phi = 0.0;

    // Clamps theta into [0, pi] and wraps phi into [0, 2pi).
    static Direction make(double theta, double phi) {
        Direction d;
        d.theta = std::clamp(theta, 0.0, pi);
        double p = std::fmod(phi, 2.0 * pi);
        if (p < 0.0) p += 2.0 * pi;
        if (p >= 2.0 * pi) p = 0.0;
        d.phi = p;
        return d;
    }

    static Direction from_degrees(double theta_deg, double phi_deg) {
        return make(deg2rad(theta_deg), deg2rad(phi_deg));
    }

    static Direction from_vector(const Vec3& v) {
        const double r = std::hypot(v[0], v[1], v[2]);
        if (r == 0.0) throw std::invalid_argument("direction of a zero vector");
        return make(std::acos(std::clamp(v[2] / r, -1.0, 1.0)), std::atan2(v[1], v[0]));
    }

    Vec3 unit() const {
        const double s = std::sin(theta);
        return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
    }

    double theta_deg() const { return rad2deg(theta); }
    double phi_deg() const { return rad2deg(phi); }
};

// Great-circle angle between two directions.
inline double angular_distance(const Direction& a, const Direction& b) {
    const Vec3 u = a.unit(), v = b.unit();
    const double c = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    return std::acos(std::clamp(c, -1.0, 1.0));
}

constexpr int sh_count(int order) { return (order + 1) * (order + 1); }
constexpr int sh_flat(int n, int m) { return n * n + n + m; }

struct SHIndex {
    int n = 0;
    int m = 0;

    constexpr int flat() const { return sh_flat(n, m); }

    static SHIndex from_flat(int q) {
        const int n = static_cast<int>(std::sqrt(static_cast<double>(q)));
        // guard against sqrt rounding for large q
        int nn = n;
        while (nn * nn > q) --nn;
        while ((nn + 1) * (nn + 1) <= q) ++nn;
        return {nn, q - nn * nn - nn};
    }
};

constexpr int sh_order_of(int q) {
    int n = 0;
    while ((n + 1) * (n + 1) <= q) ++n;
    return n;
}

struct SHVector {
    int order = 0;
    Eigen::VectorXcd coeffs;

    SHVector() : coeffs(Eigen::VectorXcd::Zero(1)) {}
    explicit SHVector(int N) : order(N), coeffs(Eigen::VectorXcd::Zero(sh_count(N))) {}
    SHVector(int N, Eigen::VectorXcd c) : order(N), coeffs(std::move(c)) {
        if (coeffs.size() != sh_count(N)) throw std::invalid_argument("SHVector length does not match order");
    }

    Eigen::Index size() const { return coeffs.size(); }
    cplx& operator()(int n, int m) { return coeffs[sh_flat(n, m)]; }
    const cplx& operator()(int n, int m) const { return coeffs[sh_flat(n, m)]; }
    double norm() const { return coeffs.norm(); }

    // Leading (M+1)^2 coefficients.
    SHVector truncated(int M) const {
        if (M > order) throw std::invalid_argument("truncation order exceeds vector order");
        return SHVector(M, coeffs.head(sh_count(M)));
    }
};

// Writes Y_n^m(theta, phi) for n <= N into out[0 .. (N+1)^2) in flat order.
// Orthonormal, Condon-Shortley phase, built from normalized associated
// Legendre recurrences so no factorial ratios appear.
inline void sh_eval_into(const Direction& dir, int N, cplx* out) {
    const double x = std::cos(dir.theta);
    const double s = std::sin(dir.theta);
    double pmm = 1.0 / std::sqrt(4.0 * pi);
    for (int m = 0; m <= N; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        const cplx eim = std::polar(1.0, m * dir.phi);
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        auto store = [&](int n, double p) {
            const cplx y = p * eim;
            out[sh_flat(n, m)] = y;
            if (m > 0) out[sh_flat(n, -m)] = sign * std::conj(y);
        };
        store(m, pmm);
        if (m + 1 > N) continue;
        double p2 = pmm;
        double p1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
        store(m + 1, p1);
        double a_prev = std::sqrt(2.0 * m + 3.0);
        for (int n = m + 2; n <= N; ++n) {
            const double nn = n, mm = m;
            const double a = std::sqrt((4.0 * nn * nn - 1.0) / (nn * nn - mm * mm));
            const double p = a * (x * p1 - p2 / a_prev);
            store(n, p);
            p2 = p1;
            p1 = p;
            a_prev = a;
        }
    }
}

inline SHVector sh_eval(const Direction& dir, int N) {
    if (N < 0) throw std::invalid_argument("SH order must be non-negative");
    SHVector y(N);
    sh_eval_into(dir, N, y.coeffs.data());
    return y;
}

// Rows are y_N^T at each direction.
inline Eigen::MatrixXcd sh_matrix(std::span<const Direction> dirs, int N) {
    const Eigen::Index rows = static_cast<Eigen::Index>(dirs.size());
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Y(rows, sh_count(N));
    for (Eigen::Index i = 0; i < rows; ++i) sh_eval_into(dirs[static_cast<std::size_t>(i)], N, Y.row(i).data());
    return Y;
}

// Legendre polynomials P_0..P_nmax at x.
inline std::vector<double> legendre_p(int nmax, double x) {
    std::vector<double> p(static_cast<std::size_t>(std::max(nmax, 1)) + 1);
    p[0] = 1.0;
    p[1] = x;
    for (int n = 1; n < nmax; ++n)
        p[static_cast<std::size_t>(n + 1)] = ((2.0 * n + 1.0) * x * p[static_cast<std::size_t>(n)] - n * p[static_cast<std::size_t>(n - 1)]) / (n + 1.0);
    p.resize(static_cast<std::size_t>(nmax) + 1);
    return p;
}

} // namespace sphmimo
