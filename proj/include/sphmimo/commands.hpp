#pragma once

#include "beamforming.hpp"
#include "config.hpp"
#include "error_analysis.hpp"
#include "io.hpp"
#include "mimo.hpp"
#include "room.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace sphmimo {

struct RunContext {
    std::filesystem::path out_dir = "out";
    int threads = 1;
    std::function<void(const std::string&)> progress; // may be empty
};

inline void note(const RunContext& ctx, const std::string& msg) {
    if (ctx.progress) ctx.progress(msg);
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

struct OfrReport {
    ErrorCurves curves;
    OFRSummary summary;
};

inline OfrReport run_ofr(const MimoModel& model, const FrequencyGrid& grid, double sigma_db, int threads) {
    OfrReport r;
    r.curves = error_curves(model, grid, threads);
    r.summary = summarize_ofr(r.curves, sigma_db, grid);
    return r;
}

inline OfrReport cmd_ofr(const RunConfig& cfg, const RunContext& ctx) {
    note(ctx, "computing error curves");
    const MimoModel model(cfg.system, cfg.error);
    OfrReport r = run_ofr(model, cfg.grid, cfg.sigma_db, ctx.threads);
    auto csv = open_output(ctx.out_dir / "error_curves.csv");
    write_error_curves_csv(csv, r.curves);
    write_json(ctx.out_dir / "ofr.json", ofr_json(r.summary));
    return r;
}

inline const char* side_name(ArrayRole r) { return r == ArrayRole::sla ? "SLA" : "SMA"; }

inline nlohmann::json cmd_match(const RunConfig& cfg, const RunContext& ctx) {
    const MimoModel model(cfg.system, cfg.error);
    const double residual = matching_criterion(cfg.system);
    note(ctx, "computing error curves before reduction");
    const OfrReport before = run_ofr(model, cfg.grid, cfg.sigma_db, ctx.threads);
    nlohmann::json j;
    j["criterion_residual"] = residual;
    j["ofr_before"] = intervals_json(before.summary.ofr);
    const double lhs = cfg.system.sma.radial.radius * cfg.system.sla.order;
    const double rhs = cfg.system.sla.radial.radius * cfg.system.sma.order;
    if (std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), std::abs(rhs))) {
        j["recommended_side"] = "none";
        j["recommended_order"] = nullptr;
        j["ofr_after"] = j["ofr_before"];
    } else {
        const OrderReduction red = reduce_order(cfg.system);
        j["recommended_side"] = side_name(red.side);
        j["recommended_order"] = red.order;
        j["residual_after"] = red.residual;
        note(ctx, "computing error curves after reduction");
        const OfrReport after = run_ofr(model.with_reduced_order(red.side, red.order), cfg.grid, cfg.sigma_db, ctx.threads);
        j["ofr_after"] = intervals_json(after.summary.ofr);
    }
    write_json(ctx.out_dir / "match.json", j);
    return j;
}

inline const RoomConfig& require_room(const RunConfig& cfg) {
    if (!cfg.room) throw ConfigError("config has no room section");
    return *cfg.room;
}

inline std::vector<ReflectionPath> room_paths(const RoomConfig& rc) { return image_sources(rc.room, rc.room.max_image_order); }

inline const ReflectionPath& pick_reflection(const std::vector<ReflectionPath>& paths, int index) {
    if (index < 0 || static_cast<std::size_t>(index) >= paths.size())
        throw ConfigError("reflection index " + std::to_string(index) + " is out of range (0.." + std::to_string(paths.size() - 1) + ")");
    return paths[static_cast<std::size_t>(index)];
}

// Free-field system aimed along one reflection: DOR/DOA and r0 of that path.
inline SystemSpec system_for_path(SystemSpec s, const ReflectionPath& p) {
    s.dor = p.dor;
    s.doa = p.doa;
    s.r0 = p.length;
    return s;
}

inline std::vector<double> band_frequencies(const BandSpec& band, int bins) {
    FrequencyGrid g{band.f_lo, band.f_hi, bins, Spacing::linear};
    return g.frequencies();
}

struct BeampatternResult {
    std::vector<Direction> grid;
    std::vector<double> power_db;
};

// SMA-side (or SLA-side) pattern of the configured beamformer at f_hz.
inline BeampatternResult room_beampattern(const RoomConfig& rc, const ReflectionPath& look, BeamformerKind kind, ArrayRole side, double f_hz) {
    const ArraySpec& a = side == ArrayRole::sma ? rc.system.sma : rc.system.sla;
    const Direction dir = side == ArrayRole::sma ? look.doa : look.dor;
    const double k = wavenumber(f_hz, rc.system.speed_of_sound);
    const auto modal = modal_matrix(a.radial, k, a.order);
    const SHVector w = kind == BeamformerKind::max_di ? max_di_sh(dir, a.order) : max_wng_sh(dir, modal);
    BeampatternResult r;
    r.grid = angular_grid(rc.beampattern_step_deg);
    r.power_db = beampattern(w, modal, r.grid, dir);
    return r;
}

inline std::vector<double> room_upsilon(const RoomConfig& rc, const ReflectionPath& look, BeamformerKind kind, std::span<const double> freqs,
                                        int threads) {
    const MimoModel model(system_for_path(rc.system, look), rc.error);
    return upsilon_curve(model, freqs, {kind, look.dor, look.doa}, threads);
}

inline void cmd_table(const RunConfig& cfg, const RunContext& ctx) {
    const RoomConfig& rc = require_room(cfg);
    auto paths = room_paths(rc);
    paths.resize(std::min(paths.size(), static_cast<std::size_t>(rc.table_rows)));
    auto out = open_output(ctx.out_dir / "reflections.csv");
    write_reflection_table_csv(out, paths);
}

inline void cmd_beampattern(const RunConfig& cfg, const RunContext& ctx, BeamformerKind kind, int reflection, ArrayRole side) {
    const RoomConfig& rc = require_room(cfg);
    const auto paths = room_paths(rc);
    const auto bp = room_beampattern(rc, pick_reflection(paths, reflection), kind, side, rc.beampattern_freq_hz);
    auto out = open_output(ctx.out_dir / "beampattern.csv");
    write_beampattern_csv(out, bp.grid, bp.power_db);
}

inline RirResult cmd_rir(const RunConfig& cfg, const RunContext& ctx, BeamformerKind kind, int reflection) {
    const RoomConfig& rc = require_room(cfg);
    const auto paths = room_paths(rc);
    const ReflectionPath& look = pick_reflection(paths, reflection);
    {
        std::vector<ReflectionPath> head(paths.begin(), paths.begin() + static_cast<std::ptrdiff_t>(std::min(paths.size(), static_cast<std::size_t>(rc.table_rows))));
        auto out = open_output(ctx.out_dir / "reflections.csv");
        write_reflection_table_csv(out, head);
    }
    note(ctx, "synthesizing directional RIR");
    RirOptions opt;
    opt.band = rc.band;
    opt.path_floor_db = rc.path_floor_db;
    opt.threads = ctx.threads;
    const RirResult rir = directional_rir(rc.room, rc.system, {kind, look.dor, look.doa}, rc.error, opt);
    {
        auto wav = open_output(ctx.out_dir / "rir.wav", true);
        write_wav_float(wav, rir.samples, rir.fs);
        auto csv = open_output(ctx.out_dir / "rir.csv");
        write_rir_csv(csv, rir.samples, rir.fs);
    }
    note(ctx, "computing beamforming error");
    const auto freqs = band_frequencies(rc.band, rc.upsilon_bins);
    const auto ups = room_upsilon(rc, look, kind, freqs, ctx.threads);
    {
        auto out = open_output(ctx.out_dir / "upsilon.csv");
        write_upsilon_csv(out, freqs, ups);
    }
    const auto bp = room_beampattern(rc, look, kind, ArrayRole::sma, rc.beampattern_freq_hz);
    auto out = open_output(ctx.out_dir / "beampattern.csv");
    write_beampattern_csv(out, bp.grid, bp.power_db);
    return rir;
}

} // namespace sphmimo
