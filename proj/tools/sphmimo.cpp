#include "sphmimo/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using namespace sphmimo;

BeamformerKind parse_kind(const std::string& s) {
    if (s == "max_di") return BeamformerKind::max_di;
    if (s == "max_wng") return BeamformerKind::max_wng;
    throw ConfigError("beamformer must be max_di or max_wng");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SLA/SMA MIMO system analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::int64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> sigma_db;
    std::optional<int> threads;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--seed", seed, "RNG seed override");
    app.add_option("--out", out_dir, "output directory override");
    app.add_option("--sigma-db", sigma_db, "OFR threshold override in dB");
    app.add_option("--threads", threads, "worker threads (default: all cores)");
    app.add_flag("--quiet", quiet, "suppress progress messages");

    auto* ofr = app.add_subcommand("ofr", "error curves and operating frequency ranges");
    auto* match = app.add_subcommand("match", "matching criterion and order reduction");
    auto* rir = app.add_subcommand("rir", "directional RIR, reflection table, beamforming error and beampattern");
    auto* bp = app.add_subcommand("beampattern", "beampattern of the configured beamformer");
    auto* table = app.add_subcommand("table", "image-source reflection table");
    auto* validate = app.add_subcommand("validate", "check the configuration only");

    std::optional<std::string> beamformer;
    std::optional<int> reflection;
    std::string side = "sma";
    for (auto* sub : {rir, bp}) {
        sub->add_option("--beamformer", beamformer, "max_di or max_wng (default from config)");
        sub->add_option("--reflection", reflection, "index into the delay-sorted reflection list (0 = direct)");
    }
    bp->add_option("--side", side, "sla or sma")->check(CLI::IsMember({"sla", "sma"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (seed) {
            if (*seed < 0) throw ConfigError("--seed must be non-negative");
            cfg.error.rng_seed = static_cast<std::uint64_t>(*seed);
            if (cfg.room) cfg.room->error.rng_seed = static_cast<std::uint64_t>(*seed);
        }
        if (sigma_db) cfg.sigma_db = *sigma_db;
        if (out_dir) cfg.output_dir = *out_dir;
        if (threads) {
            if (*threads < 0) throw ConfigError("--threads must be non-negative");
            cfg.threads = *threads;
        }

        RunContext ctx;
        ctx.out_dir = cfg.output_dir;
        ctx.threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
        if (!quiet) ctx.progress = [](const std::string& m) { std::cerr << m << '\n'; };

        if (validate->parsed()) {
            if (!quiet) std::cout << config_path << ": ok\n";
            return 0;
        }
        if (ofr->parsed()) {
            const auto r = cmd_ofr(cfg, ctx);
            if (!quiet) std::cout << ofr_json(r.summary).dump() << '\n';
        } else if (match->parsed()) {
            const auto j = cmd_match(cfg, ctx);
            if (!quiet) std::cout << j.dump() << '\n';
        } else if (table->parsed()) {
            cmd_table(cfg, ctx);
        } else {
            const RoomConfig& rc = require_room(cfg);
            const BeamformerKind kind = beamformer ? parse_kind(*beamformer) : rc.beamformer;
            const int idx = reflection.value_or(rc.look_reflection);
            if (rir->parsed()) cmd_rir(cfg, ctx, kind, idx);
            else cmd_beampattern(cfg, ctx, kind, idx, side == "sla" ? ArrayRole::sla : ArrayRole::sma);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const PreconditionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
