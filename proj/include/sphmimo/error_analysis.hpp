#pragma once

#include "except.hpp"
#include "mimo.hpp"
#include "parallel.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace sphmimo {

enum class Spacing { log, linear };

struct FrequencyGrid {
    double f_min = 30.0;
    double f_max = 10000.0;
    int bins = 200;
    Spacing spacing = Spacing::log;

    void validate() const {
        if (!(f_min > 0.0 && f_min < f_max)) throw PreconditionError("frequency grid needs 0 < f_min < f_max");
        if (bins < 2) throw PreconditionError("frequency grid needs at least two bins");
    }

    std::vector<double> frequencies() const {
        validate();
        std::vector<double> f(static_cast<std::size_t>(bins));
        for (int i = 0; i < bins; ++i) {
            const double t = static_cast<double>(i) / (bins - 1);
            f[static_cast<std::size_t>(i)] = spacing == Spacing::log ? f_min * std::pow(f_max / f_min, t) : f_min + (f_max - f_min) * t;
        }
        f.back() = f_max;
        return f;
    }
};

// Representation order: ceil(k_max r) + 2 on the larger radius.
inline int select_N_tilde(double r_L, double r_M, double f_max, double c = 343.0) {
    if (!(f_max > 0.0)) throw PreconditionError("f_max must be positive");
    return static_cast<int>(std::ceil(std::max(r_L, r_M) * 2.0 * pi * f_max / c)) + 2;
}

inline int select_N_tilde(const SystemSpec& spec, double f_max) {
    return select_N_tilde(spec.sla.radial.radius, spec.sma.radial.radius, f_max, spec.speed_of_sound);
}

// Linear-scale error ratios for one bin and realization.
struct BinErrors {
    double delta = 0.0;
    double delta_L = 0.0, delta_M = 0.0;
    double a_L = 0.0, m_L = 0.0, a_M = 0.0, m_M = 0.0;
};

namespace detail {

inline Eigen::MatrixXcd small_r(const Eigen::MatrixXcd& A) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
    const Eigen::Index r = std::min(A.rows(), A.cols());
    return qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
}

} // namespace detail

// ||Ψ̂ - Ψ||_2 from the factorization e_L ψ̂_M^H + ψ_L e_M^H, which avoids
// subtracting two nearly equal outer products.
inline double system_error_norm(const TransferBundle& b) {
    const Eigen::VectorXcd eL = b.z_L.coeffs + b.n_L.coeffs;
    const Eigen::VectorXcd eM = b.z_M.coeffs + b.n_M.coeffs;
    Eigen::MatrixXcd U(eL.size(), 2), V(eM.size(), 2);
    U << eL, b.psi_L.coeffs;
    V << b.psi_M_hat.coeffs, eM;
    const Eigen::MatrixXcd core = detail::small_r(U) * detail::small_r(V).adjoint();
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(core).singularValues()[0];
}

inline BinErrors bin_errors(const TransferBundle& b) {
    BinErrors e;
    const double pL = b.psi_L.norm(), pM = b.psi_M.norm();
    e.delta = system_error_norm(b) / (pL * pM);
    e.delta_L = (b.z_L.coeffs + b.n_L.coeffs).norm() / pL;
    e.delta_M = (b.z_M.coeffs + b.n_M.coeffs).norm() / pM;
    e.a_L = b.z_L.norm() / pL;
    e.m_L = b.n_L.norm() / pL;
    e.a_M = b.z_M.norm() / pM;
    e.m_M = b.n_M.norm() / pM;
    return e;
}

struct ErrorCurves {
    std::vector<double> freqs;
    std::vector<double> delta, delta_L, delta_M;
    std::vector<double> a_L, m_L, a_M, m_M;
    int realizations = 0;
};

// Realization averages are taken on the linear scale in a fixed order.
inline ErrorCurves error_curves(const MimoModel& model, const FrequencyGrid& grid, int threads = 1) {
    const auto freqs = grid.frequencies();
    const int R = model.error().enabled ? model.error().realizations : 1;
    std::vector<BinErrors> avg(freqs.size());
    parallel_for(freqs.size(), threads, [&](std::size_t i) {
        const auto st = model.prepare_bin(model.k_of(freqs[i]), static_cast<int>(i));
        BinErrors acc;
        for (int r = 0; r < R; ++r) {
            const BinErrors e = bin_errors(model.realize(st, r));
            acc.delta += e.delta;
            acc.delta_L += e.delta_L;
            acc.delta_M += e.delta_M;
            acc.a_L += e.a_L;
            acc.m_L += e.m_L;
            acc.a_M += e.a_M;
            acc.m_M += e.m_M;
        }
        const double s = 1.0 / R;
        avg[i] = {acc.delta * s, acc.delta_L * s, acc.delta_M * s, acc.a_L * s, acc.m_L * s, acc.a_M * s, acc.m_M * s};
    });
    ErrorCurves c;
    c.freqs = freqs;
    c.realizations = R;
    for (const auto& e : avg) {
        c.delta.push_back(e.delta);
        c.delta_L.push_back(e.delta_L);
        c.delta_M.push_back(e.delta_M);
        c.a_L.push_back(e.a_L);
        c.m_L.push_back(e.m_L);
        c.a_M.push_back(e.a_M);
        c.m_M.push_back(e.m_M);
    }
    return c;
}

inline constexpr double db_floor = -400.0;

inline double to_db(double ratio) {
    if (!(ratio > 0.0)) return db_floor;
    return std::max(20.0 * std::log10(ratio), db_floor);
}

struct FrequencyInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct OFRInterval {
    std::vector<FrequencyInterval> intervals;
    double sigma_db = 0.0;

    bool empty() const { return intervals.empty(); }
};

// OFR: maximal runs where the curve (linear ratio) is at or below sigma.
// Endpoints are interpolated in (log f, dB) between the bracketing bins.
inline OFRInterval compute_ofr(std::span<const double> freqs, std::span<const double> curve, double sigma_db) {
    if (freqs.size() != curve.size()) throw PreconditionError("frequency and curve lengths differ");
    if (!std::isfinite(sigma_db)) throw PreconditionError("sigma must be finite");
    OFRInterval out;
    out.sigma_db = sigma_db;
    const std::size_t n = freqs.size();
    std::vector<double> db(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(curve[i])) throw PreconditionError("curve contains NaN");
        db[i] = to_db(curve[i]);
    }
    auto crossing = [&](std::size_t a, std::size_t b) {
        const double t = (sigma_db - db[a]) / (db[b] - db[a]);
        return std::exp(std::log(freqs[a]) + t * (std::log(freqs[b]) - std::log(freqs[a])));
    };
    std::size_t i = 0;
    while (i < n) {
        if (db[i] > sigma_db) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < n && db[i] <= sigma_db) ++i;
        const std::size_t stop = i - 1;
        FrequencyInterval iv;
        iv.lo = start == 0 ? freqs[0] : crossing(start - 1, start);
        iv.hi = stop == n - 1 ? freqs[n - 1] : crossing(stop, stop + 1);
        out.intervals.push_back(iv);
    }
    return out;
}

// System OFR: pointwise intersection of the two array ranges.
inline OFRInterval intersect_ofr(const OFRInterval& a, const OFRInterval& b) {
    if (a.sigma_db != b.sigma_db) throw PreconditionError("OFR thresholds differ");
    OFRInterval out;
    out.sigma_db = a.sigma_db;
    for (const auto& x : a.intervals)
        for (const auto& y : b.intervals) {
            const double lo = std::max(x.lo, y.lo), hi = std::min(x.hi, y.hi);
            if (lo <= hi) out.intervals.push_back({lo, hi});
        }
    std::sort(out.intervals.begin(), out.intervals.end(), [](const auto& p, const auto& q) { return p.lo < q.lo; });
    return out;
}

// Half a bin of the grid, as a multiplicative (log) or additive (linear) slack.
struct EndpointTolerance {
    Spacing spacing = Spacing::log;
    double amount = 1.0;

    static EndpointTolerance half_bin(const FrequencyGrid& g) {
        if (g.spacing == Spacing::log) return {Spacing::log, std::pow(g.f_max / g.f_min, 0.5 / (g.bins - 1))};
        return {Spacing::linear, 0.5 * (g.f_max - g.f_min) / (g.bins - 1)};
    }

    bool le(double x, double y) const { return spacing == Spacing::log ? x <= y * amount : x <= y + amount; }
};

inline bool ofr_subset(const OFRInterval& a, const OFRInterval& b, const EndpointTolerance& tol) {
    for (const auto& x : a.intervals) {
        const bool inside = std::any_of(b.intervals.begin(), b.intervals.end(),
                                        [&](const auto& y) { return tol.le(y.lo, x.lo) && tol.le(x.hi, y.hi); });
        if (!inside) return false;
    }
    return true;
}

// Matched when one range contains the other. Both ranges must be non-empty: an array with no operating range
// cannot be part of a matched system.
inline bool is_matched(const OFRInterval& o_l, const OFRInterval& o_m, const EndpointTolerance& tol) {
    if (o_l.sigma_db != o_m.sigma_db) throw PreconditionError("OFR thresholds differ");
    if (o_l.empty() || o_m.empty()) return false;
    return ofr_subset(o_l, o_m, tol) || ofr_subset(o_m, o_l, tol);
}

// |r_M N_L - r_L N_M|; zero for a matched design.
inline double matching_criterion(double r_L, int N_L, double r_M, int N_M) {
    return std::abs(r_M * N_L - r_L * N_M);
}

inline double matching_criterion(const SystemSpec& spec) {
    return matching_criterion(spec.sla.radial.radius, spec.sla.order, spec.sma.radial.radius, spec.sma.order);
}

struct OrderReduction {
    ArrayRole side = ArrayRole::sma;
    int order = 0;
    double residual = 0.0;
};

// The SLA is reduced when r_M N_L > r_L N_M, the SMA
// otherwise; ties in the residual go to the larger order.
inline OrderReduction reduce_order(double r_L, int N_L, double r_M, int N_M) {
    const double lhs = r_M * N_L, rhs = r_L * N_M;
    if (std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), std::abs(rhs)))
        throw PreconditionError("system already satisfies the matching criterion");
    OrderReduction best;
    best.side = lhs > rhs ? ArrayRole::sla : ArrayRole::sma;
    const int N = best.side == ArrayRole::sla ? N_L : N_M;
    best.residual = INFINITY;
    for (int c = 0; c <= N; ++c) {
        const double res = best.side == ArrayRole::sla ? matching_criterion(r_L, c, r_M, N_M) : matching_criterion(r_L, N_L, r_M, c);
        if (res <= best.residual + 1e-12) {
            best.order = c;
            best.residual = res;
        }
    }
    return best;
}

inline OrderReduction reduce_order(const SystemSpec& spec) {
    return reduce_order(spec.sla.radial.radius, spec.sla.order, spec.sma.radial.radius, spec.sma.order);
}

struct OFRSummary {
    OFRInterval ofr, ofr_L, ofr_M;
    bool matched = false;
};

inline OFRSummary summarize_ofr(const ErrorCurves& c, double sigma_db, const FrequencyGrid& grid) {
    OFRSummary s;
    s.ofr = compute_ofr(c.freqs, c.delta, sigma_db);
    s.ofr_L = compute_ofr(c.freqs, c.delta_L, sigma_db);
    s.ofr_M = compute_ofr(c.freqs, c.delta_M, sigma_db);
    s.matched = is_matched(s.ofr_L, s.ofr_M, EndpointTolerance::half_bin(grid));
    return s;
}

} // namespace sphmimo
