#pragma once

#include "sphmimo/error_analysis.hpp"
#include "sphmimo/mimo.hpp"

#include <filesystem>
#include <random>

namespace fixtures {

using namespace sphmimo;

// Free-field pair with a 2" cap SLA on a 144-point spiral and a gaussian SMA.
inline SystemSpec design_system(double r_M, int N = 8, int N_tilde = 39) {
    SystemSpec s;
    s.sla.radial = RadialSpec::sla(0.2, cap_half_angle_from_diameter(inch_to_m(2), 0.2));
    s.sla.scheme = make_uniform_grid(144);
    s.sla.order = N;
    s.sla.order_tilde = N_tilde;
    s.sma.radial = RadialSpec::sma(r_M);
    s.sma.scheme = make_gaussian_grid(N);
    s.sma.order = N;
    s.sma.order_tilde = N_tilde;
    return s;
}

// Both arrays gaussian, so the sampling is exact.
inline SystemSpec gaussian_system(double r_L, int N_L, double r_M, int N_M, int N_tilde) {
    SystemSpec s;
    s.sla.radial = RadialSpec::sla(r_L, 0.15);
    s.sla.scheme = make_gaussian_grid(N_L);
    s.sla.order = N_L;
    s.sla.order_tilde = N_tilde;
    s.sma.radial = RadialSpec::sma(r_M);
    s.sma.scheme = make_gaussian_grid(N_M);
    s.sma.order = N_M;
    s.sma.order_tilde = N_tilde;
    s.dor = Direction::from_degrees(60, 30);
    s.doa = Direction::from_degrees(120, 250);
    return s;
}

inline ErrorModel no_error() {
    ErrorModel e;
    e.enabled = false;
    e.realizations = 1;
    return e;
}

inline std::filesystem::path source_dir() { return SPHMIMO_SOURCE_DIR; }

} // namespace fixtures
