#pragma once

/// Experiment configuration: sectioned key-value text (INI) or the JSON
/// written to meta.json, with command-line overrides.  Every key is typed
/// and validated before any computation; unknown keys are rejected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

#include "gkdv/errors.hpp"
#include "gkdv/io.hpp"

namespace gkdv::lab {

/// Malformed configuration or command line.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"spectrum", "identities", "linear-flows", "stability",
                                                "scatter",  "inverse",    "norms"};
    return names;
}

struct ExperimentConfig {
    struct Run {
        std::string experiment = "spectrum";
        std::uint64_t seed = 7;
        std::string output_dir = "gkdv-out";
    } run;
    struct Grid {
        std::size_t n = 1024;
        double length = 80.0;
    } grid;
    struct Solver {
        double dt = 1e-3;
        double T = 1.0;
        bool sponge = false;
        std::size_t snapshot_stride = 10;
    } solver;
    struct Modulation {
        double kappa = 10.0;
        double newton_tol = 1e-12;
    } modulation;
    struct Norms {
        double dyadic_base = 2.0;
        double compare_base = 1.26;
        double epsilon = 0.1;
        double besov_s = -1.0 / 6.0;
        double besov_p = 2.0;
        double besov_q = std::numeric_limits<double>::infinity();
    } norms;
    struct Soliton {
        double c = 1.0;
        double y = 0.0;
    } soliton;
    struct Perturbation {
        double amplitude = 1e-3;
        double k_min = 0.5;
        double k_max = 3.0;
        double width = 3.0;
    } perturbation;
    struct Spectrum {
        std::size_t count = 6;
    } spectrum;
    struct Scatter {
        double window = 0.25;
        double horizon = 20.0;
        double c_inf = 1.0;
        double y0 = 0.0;
        double data_center = -15.0;
        double data_k_min = 0.25;
        double data_k_max = 1.0;
        double data_width = 4.0;
        double smallness = 0.1;
        bool round_trip = true;
        bool reversibility = true;
        double reversibility_dt = 5e-4;
        bool cauchy = false;
    } scatter;

    struct Entry {
        std::string key;
        std::function<void(const std::string&)> set;
        std::function<std::string()> get;
    };

    /// Every recognized "section.key" with its parser and printer.
    std::vector<Entry> entries() {
        std::vector<Entry> e;
        auto dbl = [&](const std::string& k, double& v) {
            e.push_back({k, [&v, k](const std::string& s) { v = parse_double(k, s); }, [&v] { return io::fmt(v); }});
        };
        auto size = [&](const std::string& k, std::size_t& v) {
            e.push_back({k, [&v, k](const std::string& s) { v = static_cast<std::size_t>(parse_uint(k, s)); },
                         [&v] { return std::to_string(v); }});
        };
        auto u64 = [&](const std::string& k, std::uint64_t& v) {
            e.push_back({k, [&v, k](const std::string& s) { v = parse_uint(k, s); }, [&v] { return std::to_string(v); }});
        };
        auto flag = [&](const std::string& k, bool& v) {
            e.push_back({k, [&v, k](const std::string& s) { v = parse_bool(k, s); },
                         [&v] { return std::string(v ? "true" : "false"); }});
        };
        auto str = [&](const std::string& k, std::string& v) {
            e.push_back({k, [&v](const std::string& s) { v = s; }, [&v] { return v; }});
        };
        str("run.experiment", run.experiment);
        u64("run.seed", run.seed);
        str("run.output_dir", run.output_dir);
        size("grid.n", grid.n);
        dbl("grid.length", grid.length);
        dbl("solver.dt", solver.dt);
        dbl("solver.T", solver.T);
        flag("solver.sponge", solver.sponge);
        size("solver.snapshot_stride", solver.snapshot_stride);
        dbl("modulation.kappa", modulation.kappa);
        dbl("modulation.newton_tol", modulation.newton_tol);
        dbl("norms.dyadic_base", norms.dyadic_base);
        dbl("norms.compare_base", norms.compare_base);
        dbl("norms.epsilon", norms.epsilon);
        dbl("norms.besov_s", norms.besov_s);
        dbl("norms.besov_p", norms.besov_p);
        dbl("norms.besov_q", norms.besov_q);
        dbl("soliton.c", soliton.c);
        dbl("soliton.y", soliton.y);
        dbl("perturbation.amplitude", perturbation.amplitude);
        dbl("perturbation.k_min", perturbation.k_min);
        dbl("perturbation.k_max", perturbation.k_max);
        dbl("perturbation.width", perturbation.width);
        size("spectrum.count", spectrum.count);
        dbl("scatter.window", scatter.window);
        dbl("scatter.horizon", scatter.horizon);
        dbl("scatter.c_inf", scatter.c_inf);
        dbl("scatter.y0", scatter.y0);
        dbl("scatter.data_center", scatter.data_center);
        dbl("scatter.data_k_min", scatter.data_k_min);
        dbl("scatter.data_k_max", scatter.data_k_max);
        dbl("scatter.data_width", scatter.data_width);
        dbl("scatter.smallness", scatter.smallness);
        flag("scatter.round_trip", scatter.round_trip);
        flag("scatter.reversibility", scatter.reversibility);
        dbl("scatter.reversibility_dt", scatter.reversibility_dt);
        flag("scatter.cauchy", scatter.cauchy);
        return e;
    }

    /// Applies "section.key=value".
    void set(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
        set(assignment.substr(0, eq), assignment.substr(eq + 1));
    }

    void set(const std::string& key, const std::string& value) {
        for (auto& e : entries()) {
            if (e.key == key) {
                e.set(value);
                return;
            }
        }
        throw ConfigError("unknown configuration key '" + key + "'");
    }

    std::string get(const std::string& key) {
        for (auto& e : entries()) {
            if (e.key == key) return e.get();
        }
        throw ConfigError("unknown configuration key '" + key + "'");
    }

    /// Fails fast on any out-of-range value.
    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw ConfigError(what);
        };
        const auto& names = experiment_names();
        require(std::find(names.begin(), names.end(), run.experiment) != names.end(),
                "unknown experiment '" + run.experiment + "'");
        require(!run.output_dir.empty(), "run.output_dir must not be empty");
        require(grid.n >= 8 && (grid.n & (grid.n - 1)) == 0, "grid.n must be a power of two, at least 8");
        require(grid.length > 0.0 && std::isfinite(grid.length), "grid.length must be positive");
        require(solver.dt > 0.0 && std::isfinite(solver.dt), "solver.dt must be positive");
        require(solver.T > 0.0 && std::isfinite(solver.T), "solver.T must be positive");
        require(solver.snapshot_stride >= 1, "solver.snapshot_stride must be at least 1");
        require(modulation.kappa >= 1.0, "modulation.kappa must be at least 1");
        require(modulation.newton_tol > 0.0, "modulation.newton_tol must be positive");
        require(norms.dyadic_base > 1.0 && norms.compare_base > 1.0, "dyadic bases must exceed 1");
        require(norms.epsilon > 0.0 && norms.epsilon < 1.0, "norms.epsilon must lie in (0, 1)");
        require(norms.besov_p >= 1.0 && norms.besov_q >= 1.0, "Besov indices need p, q >= 1");
        require(soliton.c > 0.0, "soliton.c must be positive");
        require(perturbation.amplitude >= 0.0, "perturbation.amplitude must be nonnegative");
        require(perturbation.k_min >= 0.0 && perturbation.k_max > perturbation.k_min, "perturbation band is empty");
        require(perturbation.width > 0.0, "perturbation.width must be positive");
        require(spectrum.count >= 2 && spectrum.count <= 20, "spectrum.count must lie in 2..20");
        require(scatter.window > 0.0 && scatter.window <= 1.0, "scatter.window must lie in (0, 1]");
        require(scatter.horizon > 0.0, "scatter.horizon must be positive");
        require(scatter.c_inf > 0.0, "scatter.c_inf must be positive");
        require(scatter.data_k_min >= 0.0 && scatter.data_k_max > scatter.data_k_min, "scatter data band is empty");
        require(scatter.data_width > 0.0, "scatter.data_width must be positive");
        require(scatter.smallness > 0.0, "scatter.smallness must be positive");
        require(scatter.reversibility_dt > 0.0, "scatter.reversibility_dt must be positive");
    }

    /// {section: {key: value-string}}; load_json accepts it back.
    nlohmann::json to_json() {
        nlohmann::json j = nlohmann::json::object();
        for (auto& e : entries()) {
            const auto dot = e.key.find('.');
            j[e.key.substr(0, dot)][e.key.substr(dot + 1)] = e.get();
        }
        return j;
    }

    void load_json(const nlohmann::json& j) {
        const nlohmann::json& cfg = j.contains("config") ? j.at("config") : j;
        if (!cfg.is_object()) throw ConfigError("configuration JSON must be an object of sections");
        for (const auto& [section, body] : cfg.items()) {
            if (!body.is_object()) throw ConfigError("configuration entry '" + section + "' is not a section");
            for (const auto& [key, value] : body.items()) {
                set(section + "." + key, value.is_string() ? value.get<std::string>() : value.dump());
            }
        }
    }

    void load_ini(const std::filesystem::path& path) {
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::read_ini(path.string(), tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(std::string("cannot parse configuration: ") + e.what());
        }
        for (const auto& [section, body] : tree) {
            if (body.empty()) throw ConfigError("key '" + section + "' must appear inside a [section]");
            for (const auto& [key, value] : body) set(section + "." + key, value.data());
        }
    }

    /// INI unless the file name ends in .json.
    static ExperimentConfig from_file(const std::filesystem::path& path) {
        if (!std::filesystem::exists(path)) throw ConfigError("configuration file not found: " + path.string());
        ExperimentConfig cfg;
        if (path.extension() == ".json") {
            try {
                cfg.load_json(io::read_json(path));
            } catch (const io::ArtifactError& e) {
                throw ConfigError(e.what());
            }
        } else {
            cfg.load_ini(path);
        }
        return cfg;
    }

private:
    static double parse_double(const std::string& key, const std::string& s) {
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("key '" + key + "' expects a number, got '" + s + "'");
    }

    static std::uint64_t parse_uint(const std::string& key, const std::string& s) {
        if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
            try {
                return std::stoull(s);
            } catch (const std::exception&) {
            }
        }
        throw ConfigError("key '" + key + "' expects a nonnegative integer, got '" + s + "'");
    }

    static bool parse_bool(const std::string& key, const std::string& s) {
        if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "off" || s == "no") return false;
        throw ConfigError("key '" + key + "' expects true or false, got '" + s + "'");
    }
};

}  // namespace gkdv::lab
