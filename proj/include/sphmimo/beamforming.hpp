#pragma once

#include "except.hpp"
#include "mimo.hpp"
#include "parallel.hpp"
#include "radial.hpp"
#include "sh.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace sphmimo {

enum class BeamformerKind { max_di, max_wng };

struct BeamformerSpec {
    BeamformerKind kind = BeamformerKind::max_di;
    Direction look_sla;
    Direction look_sma;
};

// gamma/lambda act in the normalized SH domain. space_gamma holds the
// loudspeaker drive signals, applied by transpose as in y = γ̃ᵀ H̃ λ̃; it is
// the conjugate of α_Lᴴ G⁻ᴴ γ. space_lambda = α_Mᴴ B⁻ᴴ λ.
struct BeamWeights {
    SHVector gamma;
    SHVector lambda;
    Eigen::VectorXcd space_gamma;
    Eigen::VectorXcd space_lambda;
};

inline SHVector max_di_sh(const Direction& look, int N) { return sh_eval(look, N); }

// Max-WNG: steering weighted by |g_n|^2 (or |b_n|^2), normalized by
// sum_n (2n+1)/(4 pi) |g_n|^2.
inline SHVector max_wng_sh(const Direction& look, const ModalDiagonal& modal) {
    SHVector y = sh_eval(look, modal.order);
    double denom = 0.0;
    for (int n = 0; n <= modal.order; ++n) denom += (2.0 * n + 1.0) / (4.0 * pi) * std::norm(modal.values[static_cast<std::size_t>(n)]);
    for (int q = 0; q < sh_count(modal.order); ++q) y.coeffs[q] *= std::norm(modal.at_flat(q)) / denom;
    return y;
}

inline BeamWeights compose_weights(const MimoModel& model, SHVector gamma, SHVector lambda, double k) {
    const auto& spec = model.spec();
    if (gamma.order != spec.sla.order || lambda.order != spec.sma.order) throw PreconditionError("weight orders do not match the arrays");
    const Eigen::VectorXcd invG = modal_inverse(modal_matrix(spec.sla.radial, k, spec.sla.order)).expanded();
    const Eigen::VectorXcd invB = modal_inverse(modal_matrix(spec.sma.radial, k, spec.sma.order)).expanded();
    BeamWeights w;
    w.space_gamma = model.sla_sampling().alpha.transpose() * invG.cwiseProduct(gamma.coeffs.conjugate());
    w.space_lambda = model.sma_sampling().alpha.adjoint() * invB.conjugate().cwiseProduct(lambda.coeffs);
    w.gamma = std::move(gamma);
    w.lambda = std::move(lambda);
    return w;
}

// Max-DI: plain steering on both sides.
inline BeamWeights max_di_weights(const MimoModel& model, const Direction& look_sla, const Direction& look_sma, double k) {
    return compose_weights(model, max_di_sh(look_sla, model.spec().sla.order), max_di_sh(look_sma, model.spec().sma.order), k);
}

inline BeamWeights max_wng_weights(const MimoModel& model, const Direction& look_sla, const Direction& look_sma, double k) {
    const auto& spec = model.spec();
    return compose_weights(model, max_wng_sh(look_sla, modal_matrix(spec.sla.radial, k, spec.sla.order)),
                           max_wng_sh(look_sma, modal_matrix(spec.sma.radial, k, spec.sma.order)), k);
}

inline BeamWeights make_weights(const MimoModel& model, const BeamformerSpec& bf, double k) {
    return bf.kind == BeamformerKind::max_di ? max_di_weights(model, bf.look_sla, bf.look_sma, k)
                                             : max_wng_weights(model, bf.look_sla, bf.look_sma, k);
}

// y = gamma^T H lambda s in the element domain.
inline cplx system_output(const Eigen::MatrixXcd& H, const BeamWeights& w, cplx s) {
    if (H.rows() != w.space_gamma.size() || H.cols() != w.space_lambda.size())
        throw PreconditionError("transfer matrix dimensions do not match the weights");
    return (w.space_gamma.transpose() * H * w.space_lambda).value() * s;
}

// Normalized SH-domain counterpart: γᴴ Ψ̂ λ s.
inline cplx system_output_sh(const Eigen::MatrixXcd& Psi, const BeamWeights& w, cplx s) {
    if (Psi.rows() != w.gamma.size() || Psi.cols() != w.lambda.size())
        throw PreconditionError("system matrix dimensions do not match the weights");
    return (w.gamma.coeffs.adjoint() * Psi * w.lambda.coeffs).value() * s;
}

// Beamforming error for one bundle, using the rank-1 structure of Ψ and Ψ̂.
inline double upsilon(const TransferBundle& b, const BeamWeights& w) {
    const cplx clean = w.gamma.coeffs.dot(b.psi_L.coeffs) * b.psi_M.coeffs.dot(w.lambda.coeffs);
    const cplx noisy = w.gamma.coeffs.dot(b.psi_L_hat.coeffs) * b.psi_M_hat.coeffs.dot(w.lambda.coeffs);
    if (std::abs(clean) < 1e-30) throw NumericalError("beamformer output of the error-free system vanishes");
    return std::abs(clean - noisy) / std::abs(clean);
}

// Υ averaged over the model's realizations at each frequency.
inline std::vector<double> upsilon_curve(const MimoModel& model, std::span<const double> freqs, const BeamformerSpec& bf, int threads = 1) {
    const int R = model.error().enabled ? model.error().realizations : 1;
    std::vector<double> out(freqs.size());
    parallel_for(freqs.size(), threads, [&](std::size_t i) {
        const double k = model.k_of(freqs[i]);
        const auto st = model.prepare_bin(k, static_cast<int>(i));
        const auto& spec = model.spec();
        const SHVector g = bf.kind == BeamformerKind::max_di ? max_di_sh(bf.look_sla, spec.sla.order)
                                                             : max_wng_sh(bf.look_sla, modal_matrix(spec.sla.radial, k, spec.sla.order));
        const SHVector l = bf.kind == BeamformerKind::max_di ? max_di_sh(bf.look_sma, spec.sma.order)
                                                             : max_wng_sh(bf.look_sma, modal_matrix(spec.sma.radial, k, spec.sma.order));
        BeamWeights w{g, l, {}, {}};
        double acc = 0.0;
        for (int r = 0; r < R; ++r) acc += upsilon(model.realize(st, r), w);
        out[i] = acc / R;
    });
    return out;
}

// Response λᴴ y(β) of the normalized beamformer to a unit plane wave from β:
// the array delivers B y(β), the weights apply B⁻ᴴ λ.
inline cplx beam_response(const SHVector& weights, const ModalDiagonal& modal, const Direction& dir) {
    const SHVector y = sh_eval(dir, weights.order);
    cplx acc = 0.0;
    for (int q = 0; q < sh_count(weights.order); ++q) {
        const cplx b = modal.at_flat(q);
        acc += std::conj(weights.coeffs[q]) / b * (b * y.coeffs[q]);
    }
    return acc;
}

// Power in dB relative to the response at `reference`.
inline std::vector<double> beampattern(const SHVector& weights, const ModalDiagonal& modal, std::span<const Direction> grid,
                                       const Direction& reference) {
    if (modal.order < weights.order) throw PreconditionError("modal diagonal order is below the weight order");
    const double ref = std::abs(beam_response(weights, modal, reference));
    if (!(ref > 0.0)) throw NumericalError("beam response vanishes at the reference direction");
    std::vector<double> out;
    out.reserve(grid.size());
    for (const auto& d : grid) out.push_back(20.0 * std::log10(std::max(std::abs(beam_response(weights, modal, d)) / ref, 1e-300)));
    return out;
}

// theta-major grid with the given step, theta in [0, 180], phi in [0, 360).
inline std::vector<Direction> angular_grid(double step_deg = 1.0) {
    std::vector<Direction> g;
    const int nt = static_cast<int>(std::lround(180.0 / step_deg));
    const int np = static_cast<int>(std::lround(360.0 / step_deg));
    for (int i = 0; i <= nt; ++i)
        for (int j = 0; j < np; ++j) g.push_back(Direction::from_degrees(i * step_deg, j * step_deg));
    return g;
}

// 4 pi |λᴴ y(look)|^2 / ||λ||^2: orthonormality turns the sphere integral
// of |λᴴ y|^2 into ||λ||^2.
inline double directivity_index_db(const SHVector& weights, const Direction& look) {
    const cplx r = weights.coeffs.dot(sh_eval(look, weights.order).coeffs);
    return 10.0 * std::log10(4.0 * pi * std::norm(r) / weights.coeffs.squaredNorm());
}

// Gain against spatially white element noise in the unnormalized SH domain.
inline double white_noise_gain(const SHVector& weights, const ModalDiagonal& modal, const Direction& look) {
    const cplx r = weights.coeffs.dot(sh_eval(look, weights.order).coeffs);
    double noise = 0.0;
    for (int q = 0; q < sh_count(weights.order); ++q) noise += std::norm(weights.coeffs[q]) / std::norm(modal.at_flat(q));
    return std::norm(r) / noise;
}

} // namespace sphmimo
