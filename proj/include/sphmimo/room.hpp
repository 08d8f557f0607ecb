#pragma once

#include "beamforming.hpp"
#include "error_analysis.hpp"
#include "except.hpp"
#include "mimo.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sh.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace sphmimo {

struct RoomSpec {
    Vec3 dims{25.0, 15.0, 10.0};
    double t60 = 0.75;
    Vec3 sla_pos{10.0, 4.0, 1.5};
    Vec3 sma_pos{15.0, 8.0, 3.0};
    double fs = 48000.0;
    int max_image_order = 30;
    double speed_of_sound = 343.0;

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            const auto i = static_cast<std::size_t>(a);
            if (!(dims[i] > 0.0)) throw PreconditionError("room dimensions must be positive");
            if (!(sla_pos[i] > 0.0 && sla_pos[i] < dims[i]) || !(sma_pos[i] > 0.0 && sma_pos[i] < dims[i]))
                throw PreconditionError("array positions must lie strictly inside the room");
        }
        if (!(t60 > 0.0)) throw PreconditionError("t60 must be positive");
        if (!(fs > 0.0)) throw PreconditionError("sampling rate must be positive");
        if (max_image_order < 0) throw PreconditionError("image order must be non-negative");
    }

    double volume() const { return dims[0] * dims[1] * dims[2]; }
    double surface() const { return 2.0 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2]); }
};

struct ReflectionPath {
    double td = 0.0;
    Direction dor; // departure at the SLA
    Direction doa; // arrival at the SMA
    double amplitude = 0.0;
    std::array<int, 3> image_index{0, 0, 0}; // signed reflection index per axis
    double length = 0.0;

    int order() const { return std::abs(image_index[0]) + std::abs(image_index[1]) + std::abs(image_index[2]); }
};

// Walls ordered x=0, x=Lx, y=0, y=Ly, z=0, z=Lz. Uniform absorption from
// Sabine's formula, T60 = 24 ln(10) V / (c S alpha); |r| = sqrt(1 - alpha).
inline std::array<double, 6> wall_coefficients(const RoomSpec& room) {
    if (!(room.t60 > 0.0)) throw PreconditionError("t60 must be positive");
    const double alpha = 24.0 * std::log(10.0) / room.speed_of_sound * room.volume() / (room.surface() * room.t60);
    if (alpha > 1.0) throw PreconditionError("t60 too short for this room: required absorption exceeds 1");
    const double r = std::sqrt(1.0 - alpha);
    return {r, r, r, r, r, r};
}

namespace detail {

// Axis index k: even k maps x to x + k L, odd k to -x + (k+1) L; the path
// meets |k| walls on that axis.
inline double image_coord(double x, int k, double L) { return (k % 2 == 0) ? x + k * L : -x + (k + 1) * L; }

// Reflections off the lower and upper wall of the axis.
inline std::pair<int, int> wall_hits(int k) {
    const int u = (k % 2 == 0) ? 0 : 1;
    const int l = (k + u) / 2;
    return {std::abs(l - u), std::abs(l)};
}

} // namespace detail

// All images with at most `order` reflections, sorted by delay.
inline std::vector<ReflectionPath> image_sources(const RoomSpec& room, int order) {
    room.validate();
    if (order < 0) throw PreconditionError("image order must be non-negative");
    const auto r = wall_coefficients(room);
    std::vector<ReflectionPath> paths;
    for (int kx = -order; kx <= order; ++kx) {
        const int ry = order - std::abs(kx);
        for (int ky = -ry; ky <= ry; ++ky) {
            const int rz = ry - std::abs(ky);
            for (int kz = -rz; kz <= rz; ++kz) {
                const std::array<int, 3> k{kx, ky, kz};
                Vec3 src, dep, arr;
                double amp = 1.0;
                for (std::size_t a = 0; a < 3; ++a) {
                    src[a] = detail::image_coord(room.sla_pos[a], k[a], room.dims[a]);
                    const double sign = (k[a] % 2 == 0) ? 1.0 : -1.0;
                    dep[a] = sign * (room.sma_pos[a] - src[a]);
                    arr[a] = src[a] - room.sma_pos[a];
                    const auto [lo, hi] = detail::wall_hits(k[a]);
                    amp *= std::pow(r[2 * a], lo) * std::pow(r[2 * a + 1], hi);
                }
                ReflectionPath p;
                p.length = std::hypot(arr[0], arr[1], arr[2]);
                p.td = p.length / room.speed_of_sound;
                p.dor = Direction::from_vector(dep);
                p.doa = Direction::from_vector(arr);
                p.amplitude = amp / p.length;
                p.image_index = k;
                paths.push_back(p);
            }
        }
    }
    std::sort(paths.begin(), paths.end(), [](const ReflectionPath& a, const ReflectionPath& b) {
        if (a.td != b.td) return a.td < b.td;
        return a.image_index < b.image_index;
    });
    return paths;
}

// Space-domain room transfer matrix (S x R) with nominal element positions.
inline Eigen::MatrixXcd room_mimo_matrix(const MimoModel& model, std::span<const ReflectionPath> paths, double k) {
    if (paths.empty()) throw PreconditionError("no reflection paths");
    const auto& spec = model.spec();
    const auto g = modal_matrix(spec.sla.radial, k, spec.sla.order_tilde).expanded();
    const auto b = modal_matrix(spec.sma.radial, k, spec.sma.order_tilde).expanded();
    const auto& EL = model.sla_sampling().element_basis;
    const auto& EM = model.sma_sampling().element_basis;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(EL.rows(), EM.rows());
    for (const auto& p : paths) {
        const Eigen::VectorXcd hL = EL * g.cwiseProduct(sh_eval(p.dor, spec.sla.order_tilde).coeffs);
        const Eigen::VectorXcd hM = EM * b.cwiseProduct(sh_eval(p.doa, spec.sma.order_tilde).coeffs);
        H.noalias() += (std::polar(p.amplitude, k * p.length) * hL) * hM.adjoint();
    }
    return H;
}

// Normalized SH-domain room matrix sum_j a_j e^{ikd_j} y(η_j) y(β_j)ᴴ.
inline Eigen::MatrixXcd room_sh_matrix(std::span<const ReflectionPath> paths, int N_L, int N_M, double k) {
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(sh_count(N_L), sh_count(N_M));
    for (const auto& p : paths)
        P.noalias() += (std::polar(p.amplitude, k * p.length) * sh_eval(p.dor, N_L).coeffs) * sh_eval(p.doa, N_M).coeffs.adjoint();
    return P;
}

struct BandSpec {
    double f_lo = 300.0;
    double f_hi = 1900.0;
    double transition = 50.0; // raised-cosine skirt outside each edge
    int nfft = 1 << 16;
};

// Zero-phase gain: unity on [f_lo, f_hi], raised-cosine skirts outside.
inline double band_gain(double f, const BandSpec& band) {
    if (f >= band.f_lo && f <= band.f_hi) return 1.0;
    const double t = band.transition;
    if (t > 0.0 && f < band.f_lo && f > band.f_lo - t) return 0.5 * (1.0 - std::cos(pi * (f - (band.f_lo - t)) / t));
    if (t > 0.0 && f > band.f_hi && f < band.f_hi + t) return 0.5 * (1.0 + std::cos(pi * (f - band.f_hi) / t));
    return 0.0;
}

inline void validate_band(const BandSpec& band, double fs) {
    if (!(band.f_lo - band.transition > 0.0) || !(band.f_hi + band.transition < fs / 2.0) || !(band.f_lo < band.f_hi))
        throw PreconditionError("band must lie within (0, fs/2) including its transitions");
    if (band.nfft < 16 || (band.nfft & (band.nfft - 1)) != 0) throw PreconditionError("FFT size must be a power of two");
}

// FFT bins with non-zero band gain.
inline std::pair<int, int> band_bins(const BandSpec& band, double fs) {
    const double df = fs / band.nfft;
    const int lo = std::max(1, static_cast<int>(std::ceil((band.f_lo - band.transition) / df)));
    const int hi = std::min(band.nfft / 2 - 1, static_cast<int>(std::floor((band.f_hi + band.transition) / df)));
    return {lo, hi};
}

// Real time series from one-sided spectrum values P(f_k) in the e^{-iωt}
// convention used by the model (delay d gives e^{+ikd}).
inline std::vector<double> spectrum_to_time(const std::vector<cplx>& half, int nfft) {
    std::vector<cplx> X(half.size());
    for (std::size_t i = 0; i < half.size(); ++i) X[i] = std::conj(half[i]);
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> out;
    fft.inv(out, X, static_cast<Eigen::Index>(nfft));
    return out;
}

// Band-limited omni-to-omni response: the (0,0) entry of the SH-domain room matrix.
inline std::vector<double> omni_rir(std::span<const ReflectionPath> paths, double fs, const BandSpec& band, double c = 343.0) {
    validate_band(band, fs);
    const auto [lo, hi] = band_bins(band, fs);
    std::vector<cplx> half(static_cast<std::size_t>(band.nfft / 2 + 1), cplx{});
    const double df = fs / band.nfft;
    for (const auto& p : paths) {
        const double k0 = 2.0 * pi * lo * df / c, dk = 2.0 * pi * df / c;
        cplx ph = std::polar(p.amplitude / (4.0 * pi), k0 * p.length);
        const cplx step = std::polar(1.0, dk * p.length);
        for (int b = lo; b <= hi; ++b) {
            half[static_cast<std::size_t>(b)] += ph;
            ph *= step;
        }
    }
    for (int b = lo; b <= hi; ++b) half[static_cast<std::size_t>(b)] *= band_gain(b * df, band);
    return spectrum_to_time(half, band.nfft);
}

// Broadband image-source impulse train: each path rounded to the nearest sample.
inline std::vector<double> omni_impulse_train(std::span<const ReflectionPath> paths, double fs, double duration) {
    std::vector<double> x(static_cast<std::size_t>(std::ceil(duration * fs)), 0.0);
    for (const auto& p : paths) {
        const auto n = static_cast<std::size_t>(std::lround(p.td * fs));
        if (n < x.size()) x[n] += p.amplitude / (4.0 * pi);
    }
    return x;
}

// T60 from a least-squares line through the Schroeder curve (dB) on
// [t_begin, t_end].
inline double schroeder_t60(std::span<const double> x, double fs, double t_begin, double t_end) {
    std::vector<double> edc(x.size());
    double acc = 0.0;
    for (std::size_t i = x.size(); i-- > 0;) {
        acc += x[i] * x[i];
        edc[i] = acc;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = static_cast<double>(i) / fs;
        if (t < t_begin || t > t_end || !(edc[i] > 0.0)) continue;
        const double y = 10.0 * std::log10(edc[i] / edc[0]);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++n;
    }
    if (n < 2) throw NumericalError("not enough decay samples for a T60 fit");
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -60.0 / slope;
}

struct RirResult {
    double fs = 0.0;
    std::vector<double> samples;
    int order_tilde = 0;
    std::size_t paths_used = 0;
};

struct RirOptions {
    BandSpec band;
    double path_floor_db = -80.0; // drop paths this far below the strongest
    int realization = 0;
    int threads = 1;
};

namespace detail {

// Per-order beamformer gain w_n(k): SH weights are w_n(k) s_p.
inline std::vector<double> order_gains(BeamformerKind kind, const std::vector<cplx>& modal) {
    std::vector<double> w(modal.size(), 1.0);
    if (kind == BeamformerKind::max_wng) {
        double denom = 0.0;
        for (std::size_t n = 0; n < modal.size(); ++n) denom += (2.0 * n + 1.0) / (4.0 * pi) * std::norm(modal[n]);
        for (std::size_t n = 0; n < modal.size(); ++n) w[n] = std::norm(modal[n]) / denom;
    }
    return w;
}

// T[q, n (Ñ+1) + n'] = sum_{p in order n} conj(s_p) M[p, q] when order(q) = n'.
inline Eigen::MatrixXcd order_pair_projector(const SHVector& steer, const Eigen::MatrixXcd& M, int N_tilde) {
    const int N = steer.order;
    const int Qt = sh_count(N_tilde);
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(Qt, (N + 1) * (N_tilde + 1));
    for (int n = 0; n <= N; ++n) {
        const int p0 = n * n;
        const int cnt = 2 * n + 1;
        const Eigen::RowVectorXcd K = steer.coeffs.segment(p0, cnt).adjoint() * M.middleRows(p0, cnt);
        for (int q = 0; q < Qt; ++q) T(q, n * (N_tilde + 1) + sh_order_of(q)) = K[q];
    }
    return T;
}

} // namespace detail

// Directional RIR for SH weights w_n(k) s_p on each side (max-DI: w = 1,
// max-WNG: |g_n|^2 or |b_n|^2 weighting). Element positions and transducer
// noise follow `error` for the given realization. Noise is calibrated at
// calib_freq against the loudspeaker drive signals and the microphone
// signals they produce.
inline RirResult directional_rir_sh(const RoomSpec& room, const MimoModel& model, const SHVector& steer_L, const SHVector& steer_M,
                                    BeamformerKind kind, const RirOptions& opt) {
    room.validate();
    const BandSpec& band = opt.band;
    validate_band(band, room.fs);
    const auto& spec = model.spec();
    const ErrorModel& err = model.error();
    const int NL = spec.sla.order, NM = spec.sma.order;
    const int Nt = spec.sla.order_tilde;
    if (spec.sma.order_tilde != Nt) throw PreconditionError("both arrays need the same representation order");
    if (steer_L.order != NL || steer_M.order != NM) throw PreconditionError("steering orders do not match the arrays");
    const int Qt = sh_count(Nt);
    const double c = room.speed_of_sound;
    const double window = band.nfft / room.fs;

    std::vector<ReflectionPath> all = image_sources(room, room.max_image_order);
    double amax = 0.0;
    for (const auto& p : all) amax = std::max(amax, p.amplitude);
    const double amin = amax * std::pow(10.0, opt.path_floor_db / 20.0);
    std::vector<ReflectionPath> paths;
    for (const auto& p : all)
        if (p.td < window && p.amplitude >= amin) paths.push_back(p);
    const auto J = static_cast<Eigen::Index>(paths.size());

    Eigen::MatrixXcd Pdor(J, Qt), Pdoa(J, Qt);
    for (Eigen::Index j = 0; j < J; ++j) {
        const auto& p = paths[static_cast<std::size_t>(j)];
        Pdor.row(j) = sh_eval(p.dor, Nt).coeffs.transpose();
        Pdoa.row(j) = sh_eval(p.doa, Nt).coeffs.transpose();
    }

    const int real = opt.realization;
    const auto& EL = model.basis_L(real);
    const auto& EM = model.basis_M(real);
    const Eigen::MatrixXcd ML = model.sla_sampling().alpha * EL;
    const Eigen::MatrixXcd MM = model.sma_sampling().alpha * EM;
    const Eigen::MatrixXcd QL = Pdor * detail::order_pair_projector(steer_L, ML, Nt);
    const Eigen::MatrixXcd QM = Pdoa * detail::order_pair_projector(steer_M, MM, Nt);

    const bool noisy = err.enabled;
    double varL = 0.0, varM = 0.0;
    if (noisy) {
        const double k = 2.0 * pi * err.calib_freq_hz / c;
        const auto g = modal_matrix(spec.sla.radial, k, Nt);
        const auto b = modal_matrix(spec.sma.radial, k, Nt);
        const auto wL = detail::order_gains(kind, g.truncated(NL).values);
        SHVector gam(NL);
        for (int q = 0; q < sh_count(NL); ++q) gam.coeffs[q] = wL[static_cast<std::size_t>(sh_order_of(q))] * steer_L.coeffs[q];
        const Eigen::VectorXcd invG = modal_inverse(g.truncated(NL)).expanded();
        const Eigen::VectorXcd drive = model.sla_sampling().alpha.transpose() * invG.cwiseProduct(gam.coeffs.conjugate());
        const double scale = std::pow(10.0, -err.snr_db / 10.0);
        varL = drive.squaredNorm() / static_cast<double>(drive.size()) * scale;
        const auto& ELn = model.sla_sampling().element_basis;
        const auto& EMn = model.sma_sampling().element_basis;
        const Eigen::RowVectorXcd dE = drive.transpose() * ELn; // 1 x Qt
        Eigen::VectorXcd mic = Eigen::VectorXcd::Zero(EMn.rows());
        const Eigen::VectorXcd gx = g.expanded(), bx = b.expanded();
        for (Eigen::Index j = 0; j < J; ++j) {
            const auto& p = paths[static_cast<std::size_t>(j)];
            const cplx lhs = std::polar(p.amplitude, k * p.length) * (dE * gx.cwiseProduct(Pdor.row(j).transpose())).value();
            mic += lhs * (EMn * bx.cwiseProduct(Pdoa.row(j).transpose())).conjugate();
        }
        varM = mic.squaredNorm() / static_cast<double>(mic.size()) * scale;
    }

    const auto [blo, bhi] = band_bins(band, room.fs);
    const double df = room.fs / band.nfft;
    const int nb = bhi - blo + 1;
    constexpr int block = 64;
    const int nblocks = (nb + block - 1) / block;
    constexpr Eigen::Index chunk = 1024;
    std::vector<cplx> half(static_cast<std::size_t>(band.nfft / 2 + 1), cplx{});
    const int pairsL = (NL + 1) * (Nt + 1), pairsM = (NM + 1) * (Nt + 1);

    parallel_for(static_cast<std::size_t>(nblocks), opt.threads, [&](std::size_t bi) {
        const int b0 = blo + static_cast<int>(bi) * block;
        const int cnt = std::min(block, bhi + 1 - b0);
        Eigen::MatrixXcd RL(pairsL, cnt), RM(pairsM, cnt);
        Eigen::MatrixXcd gtil(Qt, cnt);
        std::vector<Eigen::VectorXcd> lam_space(static_cast<std::size_t>(cnt));
        std::vector<double> ks(static_cast<std::size_t>(cnt));
        for (int t = 0; t < cnt; ++t) {
            const double k = 2.0 * pi * (b0 + t) * df / c;
            ks[static_cast<std::size_t>(t)] = k;
            const auto g = modal_matrix(spec.sla.radial, k, Nt);
            const auto b = modal_matrix(spec.sma.radial, k, Nt);
            const auto wL = detail::order_gains(kind, g.truncated(NL).values);
            const auto wM = detail::order_gains(kind, b.truncated(NM).values);
            const auto gi = modal_inverse(g.truncated(NL));
            const auto bi_ = modal_inverse(b.truncated(NM));
            for (int n = 0; n <= NL; ++n)
                for (int m = 0; m <= Nt; ++m)
                    RL(n * (Nt + 1) + m, t) = wL[static_cast<std::size_t>(n)] * gi.values[static_cast<std::size_t>(n)] * g.values[static_cast<std::size_t>(m)];
            for (int n = 0; n <= NM; ++n)
                for (int m = 0; m <= Nt; ++m)
                    RM(n * (Nt + 1) + m, t) = wM[static_cast<std::size_t>(n)] * bi_.values[static_cast<std::size_t>(n)] * b.values[static_cast<std::size_t>(m)];
            if (noisy) {
                gtil.col(t) = g.expanded();
                SHVector lam(NM);
                for (int q = 0; q < sh_count(NM); ++q)
                    lam.coeffs[q] = wM[static_cast<std::size_t>(sh_order_of(q))] * steer_M.coeffs[q];
                lam_space[static_cast<std::size_t>(t)] = model.sma_sampling().alpha.adjoint() * modal_inverse(b.truncated(NM)).expanded().conjugate().cwiseProduct(lam.coeffs);
            }
        }
        std::vector<cplx> acc(static_cast<std::size_t>(cnt), cplx{});
        Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(Qt, cnt);
        for (Eigen::Index j0 = 0; j0 < J; j0 += chunk) {
            const Eigen::Index jc = std::min(chunk, J - j0);
            const Eigen::MatrixXcd FL = QL.middleRows(j0, jc) * RL;
            const Eigen::MatrixXcd FM = QM.middleRows(j0, jc) * RM;
            Eigen::MatrixXcd W(jc, cnt);
            for (Eigen::Index j = 0; j < jc; ++j) {
                const auto& p = paths[static_cast<std::size_t>(j0 + j)];
                cplx ph = std::polar(p.amplitude, ks[0] * p.length);
                const cplx step = std::polar(1.0, 2.0 * pi * df / c * p.length);
                for (int t = 0; t < cnt; ++t) {
                    W(j, t) = ph * std::conj(FM(j, t));
                    ph *= step;
                }
            }
            for (int t = 0; t < cnt; ++t) acc[static_cast<std::size_t>(t)] += (W.col(t).transpose() * FL.col(t)).value();
            if (noisy) Z.noalias() += Pdor.middleRows(j0, jc).transpose() * W;
        }
        for (int t = 0; t < cnt; ++t) {
            const int bin = b0 + t;
            cplx y = acc[static_cast<std::size_t>(t)];
            if (noisy) {
                CounterRng rd(err.rng_seed, static_cast<std::uint64_t>(real), static_cast<std::uint64_t>(bin), RngStream::drive_noise);
                CounterRng rm(err.rng_seed, static_cast<std::uint64_t>(real), static_cast<std::uint64_t>(bin), RngStream::mic_noise);
                Eigen::VectorXcd e(EL.rows()), nu(EM.rows());
                for (Eigen::Index s = 0; s < e.size(); ++s) e[s] = rd.circular_normal(varL);
                for (Eigen::Index r = 0; r < nu.size(); ++r) nu[r] = rm.circular_normal(varM);
                const Eigen::VectorXcd u = (EL.transpose() * e).cwiseProduct(gtil.col(t));
                y += (u.transpose() * Z.col(t)).value();
                y += (nu.transpose() * lam_space[static_cast<std::size_t>(t)]).value();
            }
            half[static_cast<std::size_t>(bin)] = y * band_gain(bin * df, band);
        }
    });

    RirResult res;
    res.fs = room.fs;
    res.samples = spectrum_to_time(half, band.nfft);
    res.order_tilde = Nt;
    res.paths_used = paths.size();
    return res;
}

// Model for RIR synthesis: Ñ from the band's upper skirt, both arrays.
inline MimoModel rir_model(SystemSpec spec, const ErrorModel& err, const BandSpec& band) {
    const int Nt = std::max({select_N_tilde(spec, band.f_hi + band.transition), spec.sla.order, spec.sma.order});
    spec.sla.order_tilde = spec.sma.order_tilde = Nt;
    return MimoModel(std::move(spec), err);
}

inline RirResult directional_rir(const RoomSpec& room, const SystemSpec& spec, const BeamformerSpec& bf, const ErrorModel& err,
                                 RirOptions opt) {
    ErrorModel e = err;
    e.realizations = std::max(e.realizations, opt.realization + 1);
    const MimoModel model = rir_model(spec, e, opt.band);
    return directional_rir_sh(room, model, sh_eval(bf.look_sla, spec.sla.order), sh_eval(bf.look_sma, spec.sma.order), bf.kind, opt);
}

// Peak over the RMS of everything else in [0, window], excluding +-guard
// around the peak. Returns the peak time too.
struct PeakMetric {
    double peak_time = 0.0;
    double ratio_db = 0.0;
};

inline PeakMetric peak_to_sidelobe(std::span<const double> x, double fs, double window = 0.1, double guard = 0.0015) {
    const auto n = std::min(x.size(), static_cast<std::size_t>(window * fs) + 1);
    std::size_t ip = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(x[i]) > std::abs(x[ip])) ip = i;
    const auto g = static_cast<std::size_t>(guard * fs);
    double s = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i + g >= ip && i <= ip + g) continue;
        s += x[i] * x[i];
        ++cnt;
    }
    PeakMetric m;
    m.peak_time = static_cast<double>(ip) / fs;
    m.ratio_db = 20.0 * std::log10(std::abs(x[ip]) / std::sqrt(s / static_cast<double>(std::max<std::size_t>(cnt, 1))));
    return m;
}

} // namespace sphmimo
