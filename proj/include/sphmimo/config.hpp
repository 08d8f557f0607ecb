#pragma once

#include "beamforming.hpp"
#include "error_analysis.hpp"
#include "except.hpp"
#include "mimo.hpp"
#include "radial.hpp"
#include "room.hpp"
#include "sampling.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sphmimo {

// Maps JSON pointers to the 1-based source line where each value starts,
// so validation errors can name a line.
class JsonLineIndex {
public:
    explicit JsonLineIndex(std::string_view text) { scan(text); }

    int line_of(std::string pointer) const {
        for (;;) {
            if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
            const auto cut = pointer.rfind('/');
            if (cut == std::string::npos || pointer.empty()) return 1;
            pointer.resize(cut);
        }
    }

private:
    struct Frame {
        std::string path;
        bool array = false;
        int index = 0;
        bool expect_key = false;
        std::string key;
    };

    static std::string escape(const std::string& k) {
        std::string out;
        for (char c : k) {
            if (c == '~') out += "~0";
            else if (c == '/') out += "~1";
            else out += c;
        }
        return out;
    }

    void record(std::vector<Frame>& st, int line, std::string* child_path) {
        std::string p;
        if (!st.empty()) {
            Frame& f = st.back();
            p = f.path + "/" + (f.array ? std::to_string(f.index) : escape(f.key));
        }
        lines_.emplace(p, line);
        if (child_path) *child_path = p;
    }

    void scan(std::string_view s) {
        std::vector<Frame> st;
        int line = 1;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const char c = s[i];
            if (c == '\n') {
                ++line;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == ':') continue;
            if (c == ',') {
                if (!st.empty()) {
                    if (st.back().array) ++st.back().index;
                    else st.back().expect_key = true;
                }
                continue;
            }
            if (c == '}' || c == ']') {
                if (!st.empty()) st.pop_back();
                continue;
            }
            if (c == '"') {
                std::string str;
                std::size_t j = i + 1;
                for (; j < s.size() && s[j] != '"'; ++j) {
                    if (s[j] == '\\' && j + 1 < s.size()) ++j;
                    str += s[j];
                }
                if (!st.empty() && !st.back().array && st.back().expect_key) {
                    st.back().key = str;
                    st.back().expect_key = false;
                } else {
                    record(st, line, nullptr);
                }
                i = j;
                continue;
            }
            if (c == '{' || c == '[') {
                std::string p;
                record(st, line, &p);
                st.push_back({p, c == '[', 0, c == '{', {}});
                continue;
            }
            // number or literal
            record(st, line, nullptr);
            while (i + 1 < s.size() && std::string_view(",}] \t\r\n").find(s[i + 1]) == std::string_view::npos) ++i;
        }
    }

    std::map<std::string, int> lines_;
};

class ConfigReader {
public:
    ConfigReader(std::string text, std::string source) : source_(std::move(source)), index_(text) {
        try {
            root_ = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            int line = 1;
            for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
                if (text[i] == '\n') ++line;
            throw ConfigError(source_ + ":" + std::to_string(line) + ": invalid JSON");
        }
        if (!root_.is_object()) fail("", "top level must be an object");
    }

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(index_.line_of(ptr)) + ": " + (ptr.empty() ? "/" : ptr) + ": " + msg);
    }

    bool has(const std::string& ptr) const { return root_.contains(nlohmann::json::json_pointer(ptr)); }

    const nlohmann::json& at(const std::string& ptr) const { return root_.at(nlohmann::json::json_pointer(ptr)); }

    void allow_keys(const std::string& ptr, std::initializer_list<std::string_view> keys) const {
        if (!has(ptr)) return;
        const auto& obj = at(ptr);
        if (!obj.is_object()) fail(ptr, "must be an object");
        for (const auto& [k, v] : obj.items()) {
            bool ok = false;
            for (auto a : keys) ok = ok || a == k;
            if (!ok) fail(ptr + "/" + k, "unknown key");
        }
    }

    double number(const std::string& ptr, std::optional<double> def = {}) const {
        if (!has(ptr)) {
            if (def) return *def;
            fail(ptr, "missing required number");
        }
        const auto& v = at(ptr);
        if (!v.is_number()) fail(ptr, "must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(ptr, "must be finite");
        return d;
    }

    double positive(const std::string& ptr, std::optional<double> def = {}) const {
        const double d = number(ptr, def);
        if (!(d > 0.0)) fail(ptr, "must be positive");
        return d;
    }

    int integer(const std::string& ptr, std::optional<int> def = {}) const {
        if (!has(ptr)) {
            if (def) return *def;
            fail(ptr, "missing required integer");
        }
        const auto& v = at(ptr);
        if (!v.is_number_integer()) fail(ptr, "must be an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& ptr, std::optional<bool> def = {}) const {
        if (!has(ptr)) {
            if (def) return *def;
            fail(ptr, "missing required boolean");
        }
        const auto& v = at(ptr);
        if (!v.is_boolean()) fail(ptr, "must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& ptr, std::optional<std::string> def = {}) const {
        if (!has(ptr)) {
            if (def) return *def;
            fail(ptr, "missing required string");
        }
        const auto& v = at(ptr);
        if (!v.is_string()) fail(ptr, "must be a string");
        return v.get<std::string>();
    }

    Vec3 vec3(const std::string& ptr, std::optional<Vec3> def = {}) const {
        if (!has(ptr)) {
            if (def) return *def;
            fail(ptr, "missing required 3-vector");
        }
        const auto& v = at(ptr);
        if (!v.is_array() || v.size() != 3) fail(ptr, "must be an array of three numbers");
        Vec3 out{};
        for (std::size_t i = 0; i < 3; ++i) out[i] = number(ptr + "/" + std::to_string(i));
        return out;
    }

    Direction direction_deg(const std::string& ptr, Direction def) const {
        if (!has(ptr)) return def;
        const auto& v = at(ptr);
        if (!v.is_array() || v.size() != 2) fail(ptr, "must be [theta_deg, phi_deg]");
        const double t = number(ptr + "/0"), p = number(ptr + "/1");
        if (t < 0.0 || t > 180.0) fail(ptr + "/0", "theta must lie in [0, 180]");
        return Direction::from_degrees(t, p);
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
    JsonLineIndex index_;
    nlohmann::json root_;
};

struct RoomConfig {
    RoomSpec room;
    BandSpec band;
    double path_floor_db = -80.0;
    SystemSpec system; // room-stage arrays; r0 and directions are set per reflection
    ErrorModel error;
    BeamformerKind beamformer = BeamformerKind::max_di;
    int look_reflection = 5;
    double beampattern_freq_hz = 1100.0;
    double beampattern_step_deg = 1.0;
    int upsilon_bins = 161;
    int table_rows = 50;
};

struct RunConfig {
    SystemSpec system;
    FrequencyGrid grid;
    ErrorModel error;
    std::optional<RoomConfig> room;
    double sigma_db = 0.0;
    std::string output_dir = "out";
    int threads = 0; // 0: all cores
};

namespace detail {

inline ArraySpec parse_array(const ConfigReader& r, const std::string& p, ArrayRole role, const std::filesystem::path& base) {
    r.allow_keys(p, {"radius", "order", "order_tilde", "layout", "cap_diameter_in", "cap_diameter_m"});
    r.allow_keys(p + "/layout", {"kind", "order", "count", "file"});
    ArraySpec a;
    const double radius = r.positive(p + "/radius");
    a.order = r.integer(p + "/order");
    if (a.order < 0) r.fail(p + "/order", "must be non-negative");
    if (role == ArrayRole::sla) {
        double d = 0.0;
        if (r.has(p + "/cap_diameter_m")) d = r.positive(p + "/cap_diameter_m");
        else if (r.has(p + "/cap_diameter_in")) d = inch_to_m(r.positive(p + "/cap_diameter_in"));
        else r.fail(p, "SLA needs cap_diameter_in or cap_diameter_m");
        if (!(d < 2.0 * radius)) r.fail(p, "cap diameter must be smaller than the sphere diameter");
        a.radial = RadialSpec::sla(radius, cap_half_angle_from_diameter(d, radius));
    } else {
        a.radial = RadialSpec::sma(radius);
    }
    const std::string kind = r.string(p + "/layout/kind");
    if (kind == "gaussian") {
        const int go = r.integer(p + "/layout/order", a.order);
        if (go < 0) r.fail(p + "/layout/order", "must be non-negative");
        a.scheme = make_gaussian_grid(go);
    } else if (kind == "uniform") {
        const int count = r.integer(p + "/layout/count");
        if (count < 1) r.fail(p + "/layout/count", "must be at least 1");
        a.scheme = make_uniform_grid(count);
    } else if (kind == "custom") {
        std::filesystem::path f = r.string(p + "/layout/file");
        if (f.is_relative()) f = base / f;
        if (!std::filesystem::exists(f)) r.fail(p + "/layout/file", "file does not exist: " + f.string());
        a.scheme = load_scheme_csv(f.string());
    } else {
        r.fail(p + "/layout/kind", "must be gaussian, uniform or custom");
    }
    if (sh_count(a.order) > a.scheme.size()) r.fail(p + "/order", "layout has fewer than (order+1)^2 elements");
    a.order_tilde = -1;
    if (r.has(p + "/order_tilde")) {
        const auto& v = r.at(p + "/order_tilde");
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") r.fail(p + "/order_tilde", "must be an integer or \"auto\"");
        } else {
            a.order_tilde = r.integer(p + "/order_tilde");
            if (a.order_tilde < a.order) r.fail(p + "/order_tilde", "must be at least order");
        }
    }
    return a;
}

inline ErrorModel parse_error(const ConfigReader& r, const std::string& p, ErrorModel def) {
    r.allow_keys(p, {"enabled", "snr_db", "calib_freq_hz", "realizations", "seed", "position_jitter_deg"});
    ErrorModel e = def;
    e.enabled = r.boolean(p + "/enabled", def.enabled);
    e.snr_db = r.number(p + "/snr_db", def.snr_db);
    e.calib_freq_hz = r.positive(p + "/calib_freq_hz", def.calib_freq_hz);
    e.realizations = r.integer(p + "/realizations", def.realizations);
    if (e.realizations < 1) r.fail(p + "/realizations", "must be at least 1");
    const int seed = r.integer(p + "/seed", static_cast<int>(def.rng_seed));
    if (seed < 0) r.fail(p + "/seed", "must be non-negative");
    e.rng_seed = static_cast<std::uint64_t>(seed);
    e.position_jitter_deg = r.number(p + "/position_jitter_deg", def.position_jitter_deg);
    if (e.position_jitter_deg < 0.0) r.fail(p + "/position_jitter_deg", "must be non-negative");
    return e;
}

inline void resolve_order_tilde(SystemSpec& s, double f_max) {
    const int auto_nt = select_N_tilde(s, f_max);
    if (s.sla.order_tilde < 0) s.sla.order_tilde = std::max(auto_nt, s.sla.order);
    if (s.sma.order_tilde < 0) s.sma.order_tilde = std::max(auto_nt, s.sma.order);
}

} // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& source, const std::filesystem::path& base_dir = ".") {
    ConfigReader r(text, source);
    r.allow_keys("", {"system", "grid", "error", "room", "analysis"});
    r.allow_keys("/system", {"speed_of_sound", "r0", "dor_deg", "doa_deg", "sla", "sma"});
    r.allow_keys("/grid", {"f_min", "f_max", "bins", "spacing"});
    r.allow_keys("/analysis", {"sigma_db", "output_dir", "threads"});
    if (!r.has("/system")) r.fail("/system", "missing section");

    RunConfig cfg;
    SystemSpec& s = cfg.system;
    s.speed_of_sound = r.positive("/system/speed_of_sound", 343.0);
    s.r0 = r.positive("/system/r0", 1.0);
    s.dor = r.direction_deg("/system/dor_deg", Direction{});
    s.doa = r.direction_deg("/system/doa_deg", Direction{});
    s.sla = detail::parse_array(r, "/system/sla", ArrayRole::sla, base_dir);
    s.sma = detail::parse_array(r, "/system/sma", ArrayRole::sma, base_dir);

    cfg.grid.f_min = r.positive("/grid/f_min", 30.0);
    cfg.grid.f_max = r.positive("/grid/f_max", 10000.0);
    cfg.grid.bins = r.integer("/grid/bins", 200);
    const std::string spacing = r.string("/grid/spacing", "log");
    if (spacing == "log") cfg.grid.spacing = Spacing::log;
    else if (spacing == "linear") cfg.grid.spacing = Spacing::linear;
    else r.fail("/grid/spacing", "must be log or linear");
    if (!(cfg.grid.f_min < cfg.grid.f_max)) r.fail("/grid/f_max", "must exceed f_min");
    if (cfg.grid.bins < 2) r.fail("/grid/bins", "must be at least 2");

    detail::resolve_order_tilde(s, cfg.grid.f_max);
    if (!(s.r0 > s.sla.radial.radius + s.sma.radial.radius)) r.fail("/system/r0", "must exceed the sum of the array radii");

    cfg.error = detail::parse_error(r, "/error", ErrorModel{});
    cfg.sigma_db = r.number("/analysis/sigma_db", 0.0);
    cfg.output_dir = r.string("/analysis/output_dir", "out");
    cfg.threads = r.integer("/analysis/threads", 0);
    if (cfg.threads < 0) r.fail("/analysis/threads", "must be non-negative");

    if (r.has("/room")) {
        const std::string p = "/room";
        r.allow_keys(p, {"dims", "t60", "sla_pos", "sma_pos", "fs", "max_image_order", "speed_of_sound", "band", "path_floor_db", "sla",
                         "sma", "error", "beamformer", "look_reflection", "beampattern_freq_hz", "beampattern_step_deg",
                         "upsilon_bins", "table_rows"});
        r.allow_keys(p + "/band", {"f_lo", "f_hi", "transition", "nfft"});
        RoomConfig rc;
        RoomSpec& rm = rc.room;
        rm.dims = r.vec3(p + "/dims");
        rm.t60 = r.positive(p + "/t60");
        rm.sla_pos = r.vec3(p + "/sla_pos");
        rm.sma_pos = r.vec3(p + "/sma_pos");
        rm.fs = r.positive(p + "/fs", 48000.0);
        rm.max_image_order = r.integer(p + "/max_image_order", 30);
        rm.speed_of_sound = r.positive(p + "/speed_of_sound", s.speed_of_sound);
        try {
            rm.validate();
            wall_coefficients(rm);
        } catch (const PreconditionError& e) {
            r.fail(p, e.what());
        }
        rc.band.f_lo = r.positive(p + "/band/f_lo", 300.0);
        rc.band.f_hi = r.positive(p + "/band/f_hi", 1900.0);
        rc.band.transition = r.number(p + "/band/transition", 50.0);
        rc.band.nfft = r.integer(p + "/band/nfft", 1 << 16);
        try {
            validate_band(rc.band, rm.fs);
        } catch (const PreconditionError& e) {
            r.fail(p + "/band", e.what());
        }
        rc.path_floor_db = r.number(p + "/path_floor_db", -80.0);
        rc.system = s;
        rc.system.speed_of_sound = rm.speed_of_sound;
        if (r.has(p + "/sla")) rc.system.sla = detail::parse_array(r, p + "/sla", ArrayRole::sla, base_dir);
        if (r.has(p + "/sma")) rc.system.sma = detail::parse_array(r, p + "/sma", ArrayRole::sma, base_dir);
        rc.system.sla.order_tilde = rc.system.sma.order_tilde = -1;
        detail::resolve_order_tilde(rc.system, rc.band.f_hi + rc.band.transition);
        ErrorModel def;
        def.snr_db = 25.0;
        def.position_jitter_deg = 1.0;
        def.rng_seed = cfg.error.rng_seed;
        rc.error = detail::parse_error(r, p + "/error", def);
        const std::string bf = r.string(p + "/beamformer", "max_di");
        if (bf == "max_di") rc.beamformer = BeamformerKind::max_di;
        else if (bf == "max_wng") rc.beamformer = BeamformerKind::max_wng;
        else r.fail(p + "/beamformer", "must be max_di or max_wng");
        rc.look_reflection = r.integer(p + "/look_reflection", 5);
        if (rc.look_reflection < 0) r.fail(p + "/look_reflection", "must be non-negative");
        rc.beampattern_freq_hz = r.positive(p + "/beampattern_freq_hz", 1100.0);
        rc.beampattern_step_deg = r.positive(p + "/beampattern_step_deg", 1.0);
        rc.upsilon_bins = r.integer(p + "/upsilon_bins", 161);
        if (rc.upsilon_bins < 2) r.fail(p + "/upsilon_bins", "must be at least 2");
        rc.table_rows = r.integer(p + "/table_rows", 50);
        if (rc.table_rows < 1) r.fail(p + "/table_rows", "must be at least 1");
        cfg.room = rc;
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

} // namespace sphmimo
