#pragma once

#include "beamforming.hpp"
#include "error_analysis.hpp"
#include "except.hpp"
#include "room.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace sphmimo {

// Fixed formatting so identical numbers always print identical bytes.
inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

inline void write_error_curves_csv(std::ostream& out, const ErrorCurves& c) {
    out << "f_hz,delta_db,delta_L_db,delta_M_db,a_L_db,m_L_db,a_M_db,m_M_db\n";
    for (std::size_t i = 0; i < c.freqs.size(); ++i) {
        out << fmt_num(c.freqs[i]);
        for (double v : {c.delta[i], c.delta_L[i], c.delta_M[i], c.a_L[i], c.m_L[i], c.a_M[i], c.m_M[i]}) out << ',' << fmt_num(to_db(v));
        out << '\n';
    }
}

inline nlohmann::json intervals_json(const OFRInterval& o) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& iv : o.intervals) a.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
    return a;
}

inline nlohmann::json ofr_json(const OFRSummary& s) {
    return {{"sigma_db", s.ofr.sigma_db},
            {"ofr", intervals_json(s.ofr)},
            {"ofr_L", intervals_json(s.ofr_L)},
            {"ofr_M", intervals_json(s.ofr_M)},
            {"matched", s.matched}};
}

inline void write_beampattern_csv(std::ostream& out, std::span<const Direction> grid, std::span<const double> power_db) {
    out << "theta_deg,phi_deg,power_db\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << fmt_num(grid[i].theta_deg()) << ',' << fmt_num(grid[i].phi_deg()) << ',' << fmt_num(power_db[i]) << '\n';
}

inline void write_upsilon_csv(std::ostream& out, std::span<const double> freqs, std::span<const double> ups) {
    out << "f_hz,upsilon_db\n";
    for (std::size_t i = 0; i < freqs.size(); ++i) out << fmt_num(freqs[i]) << ',' << fmt_num(to_db(ups[i])) << '\n';
}

inline void write_rir_csv(std::ostream& out, std::span<const double> x, double fs) {
    out << "t_s,amplitude\n";
    for (std::size_t i = 0; i < x.size(); ++i) out << fmt_num(static_cast<double>(i) / fs) << ',' << fmt_num(x[i]) << '\n';
}

inline void write_reflection_table_csv(std::ostream& out, std::span<const ReflectionPath> paths) {
    out << "idx,td_s,dor_theta_deg,dor_phi_deg,doa_theta_deg,doa_phi_deg,amplitude\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& p = paths[i];
        out << i << ',' << fmt_num(p.td) << ',' << fmt_num(p.dor.theta_deg()) << ',' << fmt_num(p.dor.phi_deg()) << ','
            << fmt_num(p.doa.theta_deg()) << ',' << fmt_num(p.doa.phi_deg()) << ',' << fmt_num(p.amplitude) << '\n';
    }
}

namespace detail {

inline void put_u32(std::ostream& o, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff), static_cast<char>((v >> 16) & 0xff),
                       static_cast<char>((v >> 24) & 0xff)};
    o.write(b, 4);
}

inline void put_u16(std::ostream& o, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    o.write(b, 2);
}

} // namespace detail

// Mono 32-bit IEEE float WAV.
inline void write_wav_float(std::ostream& out, std::span<const double> x, double fs) {
    const auto rate = static_cast<std::uint32_t>(std::lround(fs));
    const auto data_bytes = static_cast<std::uint32_t>(x.size() * 4);
    out.write("RIFF", 4);
    detail::put_u32(out, 4 + 26 + 12 + 8 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    detail::put_u32(out, 18);
    detail::put_u16(out, 3); // IEEE float
    detail::put_u16(out, 1);
    detail::put_u32(out, rate);
    detail::put_u32(out, rate * 4);
    detail::put_u16(out, 4);
    detail::put_u16(out, 32);
    detail::put_u16(out, 0);
    out.write("fact", 4);
    detail::put_u32(out, 4);
    detail::put_u32(out, static_cast<std::uint32_t>(x.size()));
    out.write("data", 4);
    detail::put_u32(out, data_bytes);
    for (double v : x) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::put_u32(out, bits);
    }
}

} // namespace sphmimo
