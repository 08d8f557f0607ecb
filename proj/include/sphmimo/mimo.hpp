#pragma once

#include "except.hpp"
#include "radial.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "sh.hpp"

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace sphmimo {

struct ArraySpec {
    RadialSpec radial;
    SamplingScheme scheme;
    int order = 0;       // controlled order N
    int order_tilde = 0; // representation order Ñ
};

struct SystemSpec {
    ArraySpec sla;
    ArraySpec sma;
    double r0 = 1.0;
    Direction dor; // η0
    Direction doa; // β0
    double speed_of_sound = 343.0;

    void validate() const {
        for (const ArraySpec* a : {&sla, &sma}) {
            if (a->order < 0 || a->order_tilde < a->order) throw PreconditionError("array orders need 0 <= N <= N_tilde");
            if (sh_count(a->order) > a->scheme.size())
                throw PreconditionError("array has fewer elements than (N+1)^2");
        }
        if (sla.radial.role != ArrayRole::sla || sma.radial.role != ArrayRole::sma)
            throw PreconditionError("array roles are swapped");
        if (!(r0 > sla.radial.radius + sma.radial.radius)) throw PreconditionError("arrays overlap: r0 must exceed r_L + r_M");
        if (!(speed_of_sound > 0.0)) throw PreconditionError("speed of sound must be positive");
    }
};

struct ErrorModel {
    bool enabled = true;
    double snr_db = 40.0;
    double calib_freq_hz = 1000.0;
    int realizations = 30;
    std::uint64_t rng_seed = 1;
    double position_jitter_deg = 0.0; // uniform in [-j, j] on both element angles
};

struct TransferBundle {
    SHVector psi_L, psi_M;
    SHVector psi_L_hat, psi_M_hat;
    SHVector z_L, z_M;
    SHVector n_L, n_M;
};

inline double wavenumber(double f_hz, double c) { return 2.0 * pi * f_hz / c; }

// y_N(dir), times e^{ikr0}/r0 on the SLA side.
inline SHVector steering_vector(const Direction& dir, int N, double r0, double k, bool include_propagation) {
    SHVector y = sh_eval(dir, N);
    if (include_propagation) {
        if (!(k > 0.0)) throw PreconditionError("wavenumber must be positive");
        y.coeffs *= std::polar(1.0 / r0, k * r0);
    }
    return y;
}

// Element directions perturbed by independent uniform offsets on theta and
// phi; excursions past a pole are reflected back onto the sphere.
inline std::vector<Direction> jitter_directions(std::span<const Direction> dirs, double jitter_rad, CounterRng& rng) {
    std::vector<Direction> out;
    out.reserve(dirs.size());
    for (const auto& d : dirs) {
        double t = d.theta + rng.uniform(-jitter_rad, jitter_rad);
        double p = d.phi + rng.uniform(-jitter_rad, jitter_rad);
        if (t < 0.0) {
            t = -t;
            p += pi;
        } else if (t > pi) {
            t = 2.0 * pi - t;
            p += pi;
        }
        out.push_back(Direction::make(t, p));
    }
    return out;
}

// Prepared free-field system: sampling matrices, noise calibration and
// per-realization element geometry. Immutable after construction.
class MimoModel {
public:
    MimoModel(SystemSpec spec, ErrorModel error) : spec_(std::move(spec)), error_(error) {
        spec_.validate();
        if (error_.realizations < 1) throw PreconditionError("need at least one realization");
        sla_ = compute_sampling_matrices(spec_.sla.scheme, spec_.sla.order, spec_.sla.order_tilde, ElementBasis::plain);
        sma_ = compute_sampling_matrices(spec_.sma.scheme, spec_.sma.order, spec_.sma.order_tilde, ElementBasis::conjugate);
        init_errors();
    }

    const SystemSpec& spec() const { return spec_; }
    const ErrorModel& error() const { return error_; }
    const SamplingMatrices& sla_sampling() const { return sla_; }
    const SamplingMatrices& sma_sampling() const { return sma_; }
    double noise_variance_sla() const { return var_L_; }
    double noise_variance_sma() const { return var_M_; }

    double k_of(double f_hz) const { return wavenumber(f_hz, spec_.speed_of_sound); }

    // Same arrays and noise, with one side's controlled order cut to N_check.
    MimoModel with_reduced_order(ArrayRole side, int N_check) const {
        MimoModel m = *this;
        if (side == ArrayRole::sla) {
            m.sla_ = truncate_alpha(sla_, N_check);
            m.spec_.sla.order = N_check;
        } else {
            m.sma_ = truncate_alpha(sma_, N_check);
            m.spec_.sma.order = N_check;
        }
        return m;
    }

    // Element-domain transfer vectors including noise for one realization.
    std::pair<Eigen::VectorXcd, Eigen::VectorXcd> space_transfer_vectors(double k, int bin, int realization) const {
        const bool on = error_.enabled;
        Eigen::VectorXcd hL = basis_L(realization) * modal_weighted_L(k);
        Eigen::VectorXcd hM = basis_M(realization) * modal_weighted_M(k);
        if (on) {
            hL += draw_noise(hL.size(), var_L_, realization, bin, RngStream::noise_sla);
            hM += draw_noise(hM.size(), var_M_, realization, bin, RngStream::noise_sma);
        }
        return {std::move(hL), std::move(hM)};
    }

    // Realization-independent pieces of one frequency bin.
    struct SideState {
        SHVector psi;
        Eigen::VectorXcd inverse;  // modal_inverse at order N, expanded
        Eigen::VectorXcd weighted; // G̃ψ̃ or B̃ψ̃ at order Ñ
        SHVector z;                // aliasing / spurious term (no jitter)
    };
    struct BinState {
        double k = 0.0;
        int bin = 0;
        SideState L, M;
    };

    BinState prepare_bin(double k, int bin) const {
        BinState st;
        st.k = k;
        st.bin = bin;
        st.L = prepare_side(k, true);
        st.M = prepare_side(k, false);
        return st;
    }

    TransferBundle realize(const BinState& st, int realization) const {
        TransferBundle b;
        realize_side(st, realization, true, b.psi_L, b.z_L, b.n_L);
        realize_side(st, realization, false, b.psi_M, b.z_M, b.n_M);
        b.psi_L_hat = SHVector(b.psi_L.order, b.psi_L.coeffs + b.z_L.coeffs + b.n_L.coeffs);
        b.psi_M_hat = SHVector(b.psi_M.order, b.psi_M.coeffs + b.z_M.coeffs + b.n_M.coeffs);
        return b;
    }

    // Normalized SH transfer vectors with their aliasing and noise parts, for
    // one bin and realization.
    TransferBundle sh_transfer_vectors(double k, int bin, int realization) const {
        return realize(prepare_bin(k, bin), realization);
    }

    // G̃ψ̃_L and B̃ψ̃_M at order Ñ.
    Eigen::VectorXcd modal_weighted_L(double k) const {
        const auto psi = steering_vector(spec_.dor, spec_.sla.order_tilde, spec_.r0, k, true);
        return modal_matrix(spec_.sla.radial, k, spec_.sla.order_tilde).expanded().cwiseProduct(psi.coeffs);
    }
    Eigen::VectorXcd modal_weighted_M(double k) const {
        const auto psi = steering_vector(spec_.doa, spec_.sma.order_tilde, spec_.r0, k, false);
        return modal_matrix(spec_.sma.radial, k, spec_.sma.order_tilde).expanded().cwiseProduct(psi.coeffs);
    }

    const Eigen::MatrixXcd& basis_L(int realization) const {
        return jittered() ? jit_L_[static_cast<std::size_t>(realization)] : sla_.element_basis;
    }
    const Eigen::MatrixXcd& basis_M(int realization) const {
        return jittered() ? jit_M_[static_cast<std::size_t>(realization)] : sma_.element_basis;
    }

    bool jittered() const { return error_.enabled && error_.position_jitter_deg > 0.0; }

private:
    void init_errors() {
        if (!error_.enabled) return;
        const double k = k_of(error_.calib_freq_hz);
        const double scale = std::pow(10.0, -error_.snr_db / 10.0);
        var_L_ = (sla_.element_basis * modal_weighted_L(k)).squaredNorm() / static_cast<double>(sla_.element_basis.rows()) * scale;
        var_M_ = (sma_.element_basis * modal_weighted_M(k)).squaredNorm() / static_cast<double>(sma_.element_basis.rows()) * scale;
        if (error_.position_jitter_deg > 0.0) {
            const double j = deg2rad(error_.position_jitter_deg);
            for (int r = 0; r < error_.realizations; ++r) {
                CounterRng rl(error_.rng_seed, static_cast<std::uint64_t>(r), 0, RngStream::jitter_sla);
                CounterRng rm(error_.rng_seed, static_cast<std::uint64_t>(r), 0, RngStream::jitter_sma);
                jit_L_.push_back(element_basis(jitter_directions(spec_.sla.scheme.directions, j, rl), spec_.sla.order_tilde, ElementBasis::plain));
                jit_M_.push_back(element_basis(jitter_directions(spec_.sma.scheme.directions, j, rm), spec_.sma.order_tilde, ElementBasis::conjugate));
            }
        }
    }

    Eigen::VectorXcd draw_noise(Eigen::Index size, double variance, int realization, int bin, RngStream stream) const {
        CounterRng rng(error_.rng_seed, static_cast<std::uint64_t>(realization), static_cast<std::uint64_t>(bin), stream);
        Eigen::VectorXcd v(size);
        for (Eigen::Index i = 0; i < size; ++i) v[i] = rng.circular_normal(variance);
        return v;
    }

    SideState prepare_side(double k, bool sla) const {
        const ArraySpec& a = sla ? spec_.sla : spec_.sma;
        const SamplingMatrices& s = sla ? sla_ : sma_;
        const int L = sh_count(a.order);
        SideState st;
        st.weighted = sla ? modal_weighted_L(k) : modal_weighted_M(k);
        st.inverse = modal_inverse(modal_matrix(a.radial, k, a.order)).expanded();
        st.psi = steering_vector(sla ? spec_.dor : spec_.doa, a.order, spec_.r0, k, sla);
        if (!jittered())
            st.z = SHVector(a.order, st.inverse.cwiseProduct(s.epsilon * st.weighted.tail(st.weighted.size() - L)));
        return st;
    }

    void realize_side(const BinState& st, int realization, bool sla, SHVector& psi, SHVector& z, SHVector& n) const {
        const SideState& side = sla ? st.L : st.M;
        const SamplingMatrices& s = sla ? sla_ : sma_;
        const int order = side.psi.order;
        psi = side.psi;
        if (jittered()) {
            const Eigen::MatrixXcd& E = sla ? basis_L(realization) : basis_M(realization);
            z = SHVector(order, side.inverse.cwiseProduct(s.alpha * (E * side.weighted)) - psi.coeffs);
        } else {
            z = side.z;
        }
        if (error_.enabled) {
            const auto noise = draw_noise(s.alpha.cols(), sla ? var_L_ : var_M_, realization, st.bin,
                                          sla ? RngStream::noise_sla : RngStream::noise_sma);
            n = SHVector(order, side.inverse.cwiseProduct(s.alpha * noise));
        } else {
            n = SHVector(order);
        }
    }

    SystemSpec spec_;
    ErrorModel error_;
    SamplingMatrices sla_, sma_;
    double var_L_ = 0.0, var_M_ = 0.0;
    std::vector<Eigen::MatrixXcd> jit_L_, jit_M_;
};

// Rank-1 outer products (Ψ̂, Ψ).
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> normalized_system_matrix(const TransferBundle& b) {
    return {b.psi_L_hat.coeffs * b.psi_M_hat.coeffs.adjoint(), b.psi_L.coeffs * b.psi_M.coeffs.adjoint()};
}

} // namespace sphmimo
