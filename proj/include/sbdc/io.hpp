#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sbdc/errors.hpp"
#include "sbdc/simulation.hpp"

namespace sbdc::scenario {

// Output root precedence: SBDC_OUT_DIR env var, then the scenario's own
// directory field, then the working directory. The directory is created.
inline std::filesystem::path resolve_out_dir(const std::string& scenario_dir) {
    std::filesystem::path base = ".";
    if (const char* env = std::getenv("SBDC_OUT_DIR"); env && *env)
        base = env;
    else if (!scenario_dir.empty())
        base = scenario_dir;
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec) throw Error("cannot create output directory " + base.string() + ": " + ec.message());
    return base;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Temp-then-rename so readers never observe a half-written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

namespace detail {

inline std::string num17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string num2f(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

// One row per stored sample: time, then agent states in agent-major order.
// Column count is n*d + 1.
inline std::string trajectory_csv(const sim::Trajectory& traj) {
    std::ostringstream out;
    out << "time";
    for (int i = 0; i < traj.n; ++i) {
        if (traj.d == 1) {
            out << ",x" << (i + 1);
        } else {
            for (int k = 0; k < traj.d; ++k) out << ",x" << (i + 1) << "_" << (k + 1);
        }
    }
    out << "\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        out << detail::num17(traj.times[s]);
        for (int j = 0; j < traj.n * traj.d; ++j) out << "," << detail::num17(traj.states[s](j));
        out << "\n";
    }
    return out.str();
}

// Self-contained time-series plot, one polyline per agent coordinate.
inline std::string trajectory_svg(const sim::Trajectory& traj) {
    constexpr double width = 800.0, height = 480.0, margin = 50.0;
    if (traj.times.empty()) throw ValidationError("cannot plot an empty trajectory");

    double t_lo = traj.times.front(), t_hi = traj.times.back();
    double y_lo = traj.states.front().minCoeff(), y_hi = y_lo;
    for (const auto& s : traj.states) {
        y_lo = std::min(y_lo, s.minCoeff());
        y_hi = std::max(y_hi, s.maxCoeff());
    }
    if (t_hi <= t_lo) t_hi = t_lo + 1.0;
    if (y_hi <= y_lo) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    auto px = [&](double t) { return margin + (t - t_lo) / (t_hi - t_lo) * (width - 2 * margin); };
    auto py = [&](double y) {
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
        << width - margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << height - margin + 20
        << "\" font-size=\"12\">" << detail::num2f(t_lo) << "</text>\n";
    out << "  <text x=\"" << width - margin << "\" y=\"" << height - margin + 20
        << "\" font-size=\"12\" text-anchor=\"end\">" << detail::num2f(t_hi) << "</text>\n";
    out << "  <text x=\"" << margin - 5 << "\" y=\"" << height - margin
        << "\" font-size=\"12\" text-anchor=\"end\">" << detail::num2f(y_lo) << "</text>\n";
    out << "  <text x=\"" << margin - 5 << "\" y=\"" << margin + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << detail::num2f(y_hi) << "</text>\n";

    int series = traj.n * traj.d;
    for (int j = 0; j < series; ++j) {
        int hue = (j * 360) / std::max(series, 1);
        out << "  <polyline fill=\"none\" stroke=\"hsl(" << hue
            << ",70%,45%)\" stroke-width=\"1\" points=\"";
        for (std::size_t s = 0; s < traj.times.size(); ++s) {
            if (s) out << " ";
            out << detail::num2f(px(traj.times[s])) << "," << detail::num2f(py(traj.states[s](j)));
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace sbdc::scenario
