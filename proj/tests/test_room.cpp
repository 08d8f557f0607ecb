#include "fixtures.hpp"
#include "sphmimo/room.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <numeric>

using namespace sphmimo;
using namespace fixtures;

namespace {

struct Row {
    double td, dor_t, dor_p, doa_t, doa_p;
};

// Direct sound and the first six reflections of the reference room.
const Row kEarly[] = {
    {0.0192, 76.82, 38.66, 103.18, 218.66},  {0.0228, 125.10, 38.66, 125.10, 218.66},
    {0.0382, 83.42, 292.62, 96.58, 247.38},  {0.0401, 109.09, 292.62, 109.09, 247.38},
    {0.0489, 22.45, 38.66, 22.45, 218.66},   {0.0546, 85.41, 74.48, 94.59, 105.52},
    {0.0560, 103.54, 74.48, 103.54, 105.52},
};

double angle_diff_deg(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

MimoModel small_room_model(int N, const ErrorModel& e) {
    SystemSpec s;
    s.sla.radial = RadialSpec::sla(0.2, cap_half_angle_from_diameter(inch_to_m(3), 0.2));
    s.sla.scheme = make_uniform_grid(36);
    s.sla.order = N;
    s.sma.radial = RadialSpec::sma(0.2);
    s.sma.scheme = make_gaussian_grid(N);
    s.sma.order = N;
    return rir_model(s, e, BandSpec{});
}

} // namespace

TEST(ImageSources, EarlyReflectionGeometry) {
    const RoomSpec room;
    const auto paths = image_sources(room, 30);
    for (std::size_t i = 0; i < std::size(kEarly); ++i) {
        const auto& p = paths[i];
        const auto& r = kEarly[i];
        EXPECT_NEAR(p.td, r.td, 1e-4) << i;
        EXPECT_LT(std::abs(p.dor.theta_deg() - r.dor_t), 0.05) << i;
        EXPECT_LT(angle_diff_deg(p.dor.phi_deg(), r.dor_p), 0.05) << i;
        EXPECT_LT(std::abs(p.doa.theta_deg() - r.doa_t), 0.05) << i;
        EXPECT_LT(angle_diff_deg(p.doa.phi_deg(), r.doa_p), 0.05) << i;
    }
    EXPECT_NEAR(paths[0].length, 6.5765, 1e-4);
    EXPECT_EQ(paths[0].order(), 0);
    EXPECT_EQ(paths[1].order(), 1);
}

TEST(ImageSources, OrderZeroIsDirectOnly) {
    const auto p = image_sources(RoomSpec{}, 0);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NEAR(p[0].amplitude, 1.0 / p[0].length, 1e-15);
}

TEST(ImageSources, CountAndSorting) {
    const auto p = image_sources(RoomSpec{}, 3);
    // number of integer points with |kx|+|ky|+|kz| <= 3
    EXPECT_EQ(p.size(), 63u);
    for (std::size_t i = 1; i < p.size(); ++i) EXPECT_LE(p[i - 1].td, p[i].td);
    for (const auto& x : p) EXPECT_NEAR(x.td, x.length / 343.0, 1e-15);
}

TEST(ImageSources, AmplitudeIsReflectionProductOverLength) {
    const RoomSpec room;
    const double r = wall_coefficients(room)[0];
    for (const auto& p : image_sources(room, 4)) EXPECT_NEAR(p.amplitude * p.length, std::pow(r, p.order()), 1e-14);
}

TEST(Walls, SabineArithmetic) {
    const RoomSpec room;
    EXPECT_DOUBLE_EQ(room.volume(), 3750.0);
    EXPECT_DOUBLE_EQ(room.surface(), 1550.0);
    const double r = wall_coefficients(room)[0];
    EXPECT_NEAR(1 - r * r, 0.519, 1e-3);
    EXPECT_NEAR(r, 0.693, 1e-3);
    RoomSpec live = room;
    live.t60 = 1e9;
    EXPECT_GT(wall_coefficients(live)[0], 1 - 1e-9);
    RoomSpec dead = room;
    dead.t60 = 0.2;
    EXPECT_THROW(wall_coefficients(dead), PreconditionError);
}

TEST(Walls, Validation) {
    RoomSpec bad;
    bad.sma_pos = {26, 8, 3};
    EXPECT_THROW(image_sources(bad, 1), PreconditionError);
    EXPECT_THROW(image_sources(RoomSpec{}, -1), PreconditionError);
}

TEST(RoomMatrix, RankBoundedByPaths) {
    const auto m = small_room_model(2, no_error());
    const auto paths = image_sources(RoomSpec{}, 1);
    const double k = m.k_of(1000);
    const auto H1 = room_mimo_matrix(m, std::span(paths).first(1), k);
    const auto s1 = Eigen::JacobiSVD<Eigen::MatrixXcd>(H1).singularValues();
    EXPECT_LT(s1[1], 1e-12 * s1[0]);
    const auto H3 = room_mimo_matrix(m, std::span(paths).first(3), k);
    const auto s3 = Eigen::JacobiSVD<Eigen::MatrixXcd>(H3).singularValues();
    EXPECT_GT(s3[2], 1e-8 * s3[0]);
    EXPECT_LT(s3[3], 1e-12 * s3[0]);
    EXPECT_THROW(room_mimo_matrix(m, std::span<const ReflectionPath>{}, k), PreconditionError);
}

TEST(Band, GainShape) {
    const BandSpec b;
    EXPECT_EQ(band_gain(300, b), 1.0);
    EXPECT_EQ(band_gain(1900, b), 1.0);
    EXPECT_NEAR(band_gain(275, b), 0.5, 1e-12);
    EXPECT_NEAR(band_gain(1925, b), 0.5, 1e-12);
    EXPECT_EQ(band_gain(240, b), 0.0);
    EXPECT_EQ(band_gain(2000, b), 0.0);
    BandSpec over = b;
    over.f_hi = 30000;
    EXPECT_THROW(validate_band(over, 48000), PreconditionError);
}

TEST(Spectrum, Parseval) {
    const int nfft = 1024;
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    std::vector<cplx> half(nfft / 2 + 1);
    for (auto& v : half) v = {nd(gen), nd(gen)};
    half.front() = half.front().real();
    half.back() = half.back().real();
    const auto x = spectrum_to_time(half, nfft);
    double et = 0, ef = 0;
    for (double v : x) et += v * v;
    for (std::size_t i = 0; i < half.size(); ++i) ef += (i == 0 || i + 1 == half.size() ? 1.0 : 2.0) * std::norm(half[i]);
    ef /= nfft;
    EXPECT_NEAR(et, ef, 1e-9 * ef);
}

// Zero-phase band limiting keeps each early arrival at its delay.
TEST(OmniRir, PeaksAtPathDelays) {
    const RoomSpec room;
    const auto paths = image_sources(room, 2);
    const auto x = omni_rir(paths, room.fs, BandSpec{});
    for (std::size_t i = 0; i < 5; ++i) {
        const double n0 = paths[i].td * room.fs;
        const auto c = static_cast<std::size_t>(std::lround(n0));
        std::size_t best = c - 8;
        for (std::size_t j = c - 8; j <= c + 8; ++j)
            if (std::abs(x[j]) > std::abs(x[best])) best = j;
        EXPECT_LE(std::abs(static_cast<double>(best) - n0), 1.0) << i;
    }
    const auto train = omni_impulse_train(paths, room.fs, 0.1);
    const auto direct = static_cast<std::size_t>(std::lround(paths[0].td * room.fs));
    EXPECT_NEAR(train[direct], paths[0].amplitude / (4 * pi), 1e-15);
}

TEST(OmniRir, DecayMatchesTargetT60) {
    const RoomSpec room;
    const auto paths = image_sources(room, room.max_image_order);
    const auto x = omni_impulse_train(paths, room.fs, 1.2);
    const double t60 = schroeder_t60(x, room.fs, 0.0, 0.4);
    EXPECT_NEAR(t60, 0.75, 0.15 * 0.75);
}

TEST(DirectionalRir, ZeroWeightsGiveSilence) {
    ErrorModel e;
    e.snr_db = 25;
    e.position_jitter_deg = 1;
    e.realizations = 1;
    const auto m = small_room_model(2, e);
    RoomSpec room;
    room.max_image_order = 4;
    RirOptions opt;
    opt.band.nfft = 1 << 13;
    const auto r = directional_rir_sh(room, m, SHVector(2), SHVector(2), BeamformerKind::max_di, opt);
    for (double v : r.samples) ASSERT_EQ(v, 0.0);
}

TEST(DirectionalRir, ThreadCountInvariant) {
    ErrorModel e;
    e.snr_db = 25;
    e.position_jitter_deg = 1;
    e.realizations = 1;
    RoomSpec room;
    room.max_image_order = 6;
    SystemSpec s;
    s.sla.radial = RadialSpec::sla(0.2, 0.19);
    s.sla.scheme = make_uniform_grid(36);
    s.sla.order = 2;
    s.sma.radial = RadialSpec::sma(0.04);
    s.sma.scheme = make_gaussian_grid(2);
    s.sma.order = 2;
    const auto paths = image_sources(room, 2);
    const BeamformerSpec bf{BeamformerKind::max_di, paths[5].dor, paths[5].doa};
    RirOptions opt;
    opt.band.nfft = 1 << 14;
    const auto a = directional_rir(room, s, bf, e, opt);
    opt.threads = 3;
    const auto b = directional_rir(room, s, bf, e, opt);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_GT(a.paths_used, 0u);
}

// Error-free and alias-free, aligned look: a single path gives the omni
// pulse scaled by the steering products.
TEST(DirectionalRir, SinglePathMatchesAnalyticGain) {
    RoomSpec room;
    room.max_image_order = 0;
    const MimoModel m(gaussian_system(0.2, 3, 0.2, 3, 3), no_error());
    const auto p = image_sources(room, 0)[0];
    RirOptions opt;
    opt.band.nfft = 1 << 13;
    const auto steerL = sh_eval(p.dor, 3), steerM = sh_eval(p.doa, 3);
    const auto r = directional_rir_sh(room, m, steerL, steerM, BeamformerKind::max_di, opt);
    // relative to the omni pulse a/(4 pi): |y(η)|^2 |y(β)|^2 4 pi
    const double gain = std::pow(16.0 / (4 * pi), 2) * 4 * pi;
    const auto x = omni_rir(std::span(&p, 1), room.fs, opt.band);
    for (std::size_t i = 0; i < x.size(); i += 37) EXPECT_NEAR(r.samples[i], gain * x[i], 1e-9 * gain * std::abs(x[i]) + 1e-15);
}

TEST(PeakMetric, IsolatedPulse) {
    std::vector<double> x(4800, 0.0);
    x[1000] = 1.0;
    x[2000] = 0.1;
    const auto m = peak_to_sidelobe(x, 48000);
    EXPECT_NEAR(m.peak_time, 1000.0 / 48000, 1e-12);
    // one sidelobe sample of 0.1 among 4801 - 145 samples
    const double rms = std::sqrt(0.01 / (4801.0 - 145.0));
    EXPECT_NEAR(m.ratio_db, 20 * std::log10(1.0 / rms), 0.05);
}
