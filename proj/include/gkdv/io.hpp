#pragma once

/// Plain-text persistence: fields and logs as CSV with 17 significant
/// digits, metadata as JSON.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gkdv/errors.hpp"
#include "gkdv/flows.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/linearized.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/scattering.hpp"

namespace gkdv::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Missing, unreadable or malformed artifact.
class ArtifactError : public Error {
public:
    using Error::Error;
};

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write " + path.string());
    return out;
}

inline void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

inline json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("missing artifact " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ArtifactError("corrupt JSON in " + path.string() + ": " + e.what());
    }
}

/// Rows of a CSV file with a header line; every row must have the header's width.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw ArtifactError("column '" + name + "' not found");
    }
};

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

inline Table read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("missing artifact " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ArtifactError("empty CSV " + path.string());
    t.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw ArtifactError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(t.header.size()) + " columns");
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw ArtifactError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void write_csv(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << fmt(r[i]);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Fields

/// Writes "x,value" rows and a sidecar <path>.json holding {n, length, t}.
inline void write_field(const fs::path& path, const Field& f, double t = 0.0) {
    const auto& g = f.grid();
    std::vector<std::vector<double>> rows;
    rows.reserve(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) rows.push_back({g.x(j), f[j]});
    write_csv(path, {"x", "value"}, rows);
    write_json(fs::path(path.string() + ".json"), {{"n", g.n()}, {"length", g.length()}, {"t", t}});
}

inline Field read_field(const fs::path& path, double* t = nullptr) {
    const json side = read_json(fs::path(path.string() + ".json"));
    const GridSpec g(side.at("n").get<std::size_t>(), side.at("length").get<double>());
    const Table tab = read_csv(path);
    if (tab.rows.size() != g.n()) throw ArtifactError(path.string() + ": row count does not match sidecar n");
    Field f(g);
    const std::size_t col = tab.column("value");
    for (std::size_t j = 0; j < g.n(); ++j) f[j] = tab.rows[j][col];
    if (t) *t = side.value("t", 0.0);
    return f;
}

// ---------------------------------------------------------------------------
// Logs

inline void write_conserved(const fs::path& path, const Trajectory& traj) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        rows.push_back({traj.time(i), traj.conserved()[i].mass, traj.conserved()[i].energy});
    }
    write_csv(path, {"t", "mass", "energy"}, rows);
}

inline void write_modulation_log(const fs::path& path, const std::vector<ModulationState>& states) {
    std::vector<std::vector<double>> rows;
    for (const auto& s : states) {
        rows.push_back({s.t, s.c, s.y, s.cdot, s.ydot_minus_c2, s.ip_q, s.ip_dq, s.mass, s.energy});
    }
    write_csv(path, {"t", "c", "y", "cdot", "ydot_minus_c2", "ip_wQ", "ip_wQp", "mass", "energy"}, rows);
}

inline void write_spectrum(const fs::path& path, const std::vector<Eigenpair>& pairs) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        rows.push_back({static_cast<double>(i), pairs[i].value, pairs[i].residual});
    }
    write_csv(path, {"index", "eigenvalue", "residual"}, rows);
}

inline void write_residual_curve(const fs::path& path, const ScatterReport& rep) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : rep.residual_curve) rows.push_back({r.t, r.l2, r.besov});
    write_csv(path, {"t", "l2", "besov"}, rows);
}

inline json to_json(const ScatterReport& rep) {
    return {{"converged", rep.converged},
            {"norm_used", rep.norm_used},
            {"window_begin", rep.window_begin},
            {"window_end", rep.window_end},
            {"window_samples", rep.window_samples},
            {"z0_l2", l2_norm(rep.z0)},
            {"initial_residual", rep.residual_curve.front().besov},
            {"final_residual", rep.residual_curve.back().besov}};
}

inline json to_json(const NormReport& rep) {
    json bands = json::array();
    for (const auto& b : rep.per_band) bands.push_back({{"lambda", b.lambda}, {"value", b.value}});
    return {{"name", rep.name}, {"value", rep.value}, {"per_band", bands}};
}

// ---------------------------------------------------------------------------
// Trajectories

/// Directory with meta.json, times.csv, conserved.csv and state_%06d.csv.
inline void write_trajectory(const fs::path& dir, const Trajectory& traj) {
    fs::create_directories(dir);
    const auto& m = traj.meta();
    write_json(dir / "meta.json", {{"flow", m.flow},
                                   {"integrator", m.integrator},
                                   {"dt", m.dt},
                                   {"stride", m.stride},
                                   {"sponge", m.sponge},
                                   {"time_reversed", m.time_reversed},
                                   {"frame", {{"c", m.frame.c}, {"y", m.frame.y}}},
                                   {"max_orthogonality", m.max_orthogonality},
                                   {"warnings", m.warnings},
                                   {"n", traj.grid().n()},
                                   {"length", traj.grid().length()},
                                   {"snapshots", traj.size()}});
    std::vector<std::vector<double>> times;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        times.push_back({static_cast<double>(i), traj.time(i)});
        char name[32];
        std::snprintf(name, sizeof name, "state_%06zu.csv", i);
        write_field(dir / name, traj.state(i), traj.time(i));
    }
    write_csv(dir / "times.csv", {"index", "t"}, times);
    write_conserved(dir / "conserved.csv", traj);
}

inline Trajectory read_trajectory(const fs::path& dir) {
    const json meta = read_json(dir / "meta.json");
    TrajectoryMeta m;
    m.flow = meta.value("flow", "");
    m.integrator = meta.value("integrator", "etdrk4");
    m.dt = meta.value("dt", 0.0);
    m.stride = meta.value("stride", std::size_t{1});
    m.sponge = meta.value("sponge", false);
    m.time_reversed = meta.value("time_reversed", false);
    const GridSpec g(meta.at("n").get<std::size_t>(), meta.at("length").get<double>());
    Trajectory traj(g, m);
    const Table times = read_csv(dir / "times.csv");
    const Table cons = read_csv(dir / "conserved.csv");
    if (cons.rows.size() != times.rows.size()) throw ArtifactError("conserved.csv and times.csv disagree in length");
    for (std::size_t i = 0; i < times.rows.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "state_%06zu.csv", i);
        traj.push(times.rows[i][1], read_field(dir / name), {cons.rows[i][1], cons.rows[i][2]});
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Errors

/// Machine-readable description of a failure.
inline json error_json(const std::exception& e) {
    json j{{"message", e.what()}};
    if (const auto* a = dynamic_cast<const NumericAbort*>(&e)) {
        j["type"] = "NumericAbort";
        j["last_time"] = a->last_time();
    } else if (const auto* c = dynamic_cast<const NoConvergence*>(&e)) {
        j["type"] = "NoConvergence";
        j["residual"] = c->residual();
    } else if (dynamic_cast<const GridMismatch*>(&e)) {
        j["type"] = "GridMismatch";
    } else if (dynamic_cast<const InvalidArgument*>(&e)) {
        j["type"] = "InvalidArgument";
    } else if (dynamic_cast<const ArtifactError*>(&e)) {
        j["type"] = "ArtifactError";
    } else {
        j["type"] = "Error";
    }
    return j;
}

}  // namespace gkdv::io
