#pragma once

#include "sh.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace sphmimo {

// j_n, y_n and their derivatives for n = 0..nmax at a single argument.
struct SphericalBesselTable {
    double x = 0.0;
    std::vector<double> j, y, dj, dy;

    int nmax() const { return static_cast<int>(j.size()) - 1; }
    cplx h1(int n) const { return {j[static_cast<std::size_t>(n)], y[static_cast<std::size_t>(n)]}; }
    cplx dh1(int n) const { return {dj[static_cast<std::size_t>(n)], dy[static_cast<std::size_t>(n)]}; }
};

namespace detail {

// Miller downward recurrence, normalized with sum_n (2n+1) j_n^2 = 1.
inline std::vector<double> sph_j_downward(int nmax, double x) {
    const int start = nmax + 20 + static_cast<int>(std::sqrt(40.0 * (nmax + x)) + x);
    std::vector<double> f(static_cast<std::size_t>(start) + 2, 0.0);
    f[static_cast<std::size_t>(start)] = 1.0;
    for (int n = start; n >= 1; --n) {
        const auto un = static_cast<std::size_t>(n);
        f[un - 1] = (2.0 * n + 1.0) / x * f[un] - f[un + 1];
        if (std::abs(f[un - 1]) > 1e100) {
            for (std::size_t i = un - 1; i < f.size(); ++i) f[i] *= 1e-100;
        }
    }
    double sum = 0.0;
    for (int n = start; n >= 0; --n) {
        const double v = f[static_cast<std::size_t>(n)];
        sum += (2.0 * n + 1.0) * v * v;
    }
    double scale = 1.0 / std::sqrt(sum);
    const double j0 = std::sin(x) / x;
    const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    const bool use0 = std::abs(j0) >= std::abs(j1);
    const double ref = use0 ? j0 : j1;
    const double got = use0 ? f[0] : f[1];
    if ((ref < 0.0) != (got < 0.0)) scale = -scale;
    f.resize(static_cast<std::size_t>(nmax) + 1);
    for (double& v : f) v *= scale;
    return f;
}

} // namespace detail

inline SphericalBesselTable spherical_bessel_table(int nmax, double x) {
    if (!(x > 0.0)) throw std::domain_error("spherical Bessel argument must be positive");
    if (nmax < 0) throw std::domain_error("spherical Bessel order must be non-negative");
    const int top = nmax + 1;
    const auto sz = static_cast<std::size_t>(top) + 1;
    SphericalBesselTable t;
    t.x = x;
    t.y.resize(sz);
    t.y[0] = -std::cos(x) / x;
    t.y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
    for (int n = 1; n < top; ++n) {
        const auto un = static_cast<std::size_t>(n);
        t.y[un + 1] = (2.0 * n + 1.0) / x * t.y[un] - t.y[un - 1];
    }
    if (top > x) {
        t.j = detail::sph_j_downward(top, x);
    } else {
        t.j.resize(sz);
        t.j[0] = std::sin(x) / x;
        t.j[1] = std::sin(x) / (x * x) - std::cos(x) / x;
        for (int n = 1; n < top; ++n) {
            const auto un = static_cast<std::size_t>(n);
            t.j[un + 1] = (2.0 * n + 1.0) / x * t.j[un] - t.j[un - 1];
        }
    }
    t.dj.resize(sz - 1);
    t.dy.resize(sz - 1);
    t.dj[0] = -t.j[1];
    t.dy[0] = -t.y[1];
    for (int n = 1; n <= nmax; ++n) {
        const auto un = static_cast<std::size_t>(n);
        t.dj[un] = t.j[un - 1] - (n + 1.0) / x * t.j[un];
        t.dy[un] = t.y[un - 1] - (n + 1.0) / x * t.y[un];
    }
    t.j.resize(sz - 1);
    t.y.resize(sz - 1);
    return t;
}

inline double sph_bessel_j(int n, double x) { return spherical_bessel_table(n, x).j.back(); }
inline double sph_bessel_y(int n, double x) { return spherical_bessel_table(n, x).y.back(); }
inline double sph_bessel_j_prime(int n, double x) { return spherical_bessel_table(n, x).dj.back(); }
inline double sph_bessel_y_prime(int n, double x) { return spherical_bessel_table(n, x).dy.back(); }
inline cplx sph_hankel1(int n, double x) { return spherical_bessel_table(n, x).h1(n); }
inline cplx sph_hankel1_prime(int n, double x) { return spherical_bessel_table(n, x).dh1(n); }

} // namespace sphmimo
