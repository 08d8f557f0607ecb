#pragma once

#include "bessel.hpp"
#include "except.hpp"
#include "sh.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace sphmimo {

enum class ArrayRole { sla, sma };

struct RadialSpec {
    ArrayRole role = ArrayRole::sma;
    double radius = 0.1;
    double cap_half_angle = 0.0; // SLA only

    static RadialSpec sma(double radius) {
        if (!(radius > 0.0)) throw PreconditionError("array radius must be positive");
        return {ArrayRole::sma, radius, 0.0};
    }

    static RadialSpec sla(double radius, double cap_half_angle) {
        if (!(radius > 0.0)) throw PreconditionError("array radius must be positive");
        if (!(cap_half_angle > 0.0 && cap_half_angle < pi / 2.0))
            throw PreconditionError("cap half-angle must lie in (0, pi/2)");
        return {ArrayRole::sla, radius, cap_half_angle};
    }
};

// Half-angle subtended by a cap of diameter d on a sphere of radius r.
inline double cap_half_angle_from_diameter(double diameter, double radius) {
    const double s = 0.5 * diameter / radius;
    if (!(s > 0.0 && s < 1.0)) throw PreconditionError("cap diameter must be positive and smaller than the sphere");
    return std::asin(s);
}

inline double inch_to_m(double in) { return in * 0.0254; }

// C_n = integral of P_n(cos t) sin t over [0, alpha], the Legendre
// coefficient of the cap indicator without its (2n+1)/2 factor.
inline std::vector<double> cap_coefficients(int nmax, double alpha) {
    const double x = std::cos(alpha);
    const auto p = legendre_p(nmax + 1, x);
    std::vector<double> c(static_cast<std::size_t>(nmax) + 1);
    c[0] = 1.0 - x;
    for (int n = 1; n <= nmax; ++n) {
        const auto un = static_cast<std::size_t>(n);
        c[un] = (p[un - 1] - p[un + 1]) / (2.0 * n + 1.0);
    }
    return c;
}

// i^n
inline cplx ipow(int n) {
    switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

// b_n(kr) for n = 0..nmax. Uses the Wronskian j h' - j' h = i/x^2 to avoid
// forming the bracket explicitly.
inline std::vector<cplx> rigid_sphere_b(int nmax, double kr) {
    const auto t = spherical_bessel_table(nmax, kr);
    std::vector<cplx> b(static_cast<std::size_t>(nmax) + 1);
    const cplx i1(0.0, 1.0);
    for (int n = 0; n <= nmax; ++n)
        b[static_cast<std::size_t>(n)] = 4.0 * pi * ipow(n) * i1 / (kr * kr * t.dh1(n));
    return b;
}

inline std::vector<cplx> cap_radiator_g(int nmax, double kr, double alpha) {
    const auto t = spherical_bessel_table(nmax, kr);
    const auto c = cap_coefficients(nmax, alpha);
    std::vector<cplx> g(static_cast<std::size_t>(nmax) + 1);
    for (int n = 0; n <= nmax; ++n) {
        const auto un = static_cast<std::size_t>(n);
        g[un] = c[un] / (kr * kr * t.dh1(n));
    }
    return g;
}

inline cplx b_n(double k, const RadialSpec& spec, int n) {
    if (!(k > 0.0)) throw PreconditionError("wavenumber must be positive");
    return rigid_sphere_b(n, k * spec.radius).back();
}

inline cplx g_n(double k, const RadialSpec& spec, int n) {
    if (!(k > 0.0)) throw PreconditionError("wavenumber must be positive");
    return cap_radiator_g(n, k * spec.radius, spec.cap_half_angle).back();
}

// Diagonal of G or B: one value per order n, shared by all degrees m.
struct ModalDiagonal {
    int order = 0;
    std::vector<cplx> values;

    cplx at_flat(int q) const { return values[static_cast<std::size_t>(sh_order_of(q))]; }

    Eigen::VectorXcd expanded() const {
        Eigen::VectorXcd d(sh_count(order));
        for (int n = 0; n <= order; ++n)
            for (int m = -n; m <= n; ++m) d[sh_flat(n, m)] = values[static_cast<std::size_t>(n)];
        return d;
    }

    ModalDiagonal truncated(int M) const {
        ModalDiagonal t;
        t.order = M;
        t.values.assign(values.begin(), values.begin() + M + 1);
        return t;
    }
};

inline constexpr double default_conditioning_floor = 1e-300;

inline ModalDiagonal modal_matrix(const RadialSpec& spec, double k, int N) {
    if (!(k > 0.0)) throw PreconditionError("wavenumber must be positive");
    const double kr = k * spec.radius;
    ModalDiagonal d;
    d.order = N;
    d.values = spec.role == ArrayRole::sma ? rigid_sphere_b(N, kr) : cap_radiator_g(N, kr, spec.cap_half_angle);
    return d;
}

inline ModalDiagonal modal_inverse(const ModalDiagonal& d, double floor = default_conditioning_floor) {
    ModalDiagonal inv;
    inv.order = d.order;
    inv.values.resize(d.values.size());
    for (std::size_t n = 0; n < d.values.size(); ++n) {
        const double mag = std::abs(d.values[n]);
        if (!(mag >= floor) || !std::isfinite(mag))
            throw ConditioningError("modal coefficient of order " + std::to_string(n) + " is below the conditioning floor");
        inv.values[n] = 1.0 / d.values[n];
    }
    return inv;
}

} // namespace sphmimo
