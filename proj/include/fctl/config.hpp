#pragma once

// Flat key=value experiment configuration.
//
// The on-disk format is one `key = value` pair per line, '#' starts a
// comment, blank lines are ignored.  Keys are a fixed whitelist; unknown
// keys and malformed values raise ConfigError naming the offending key.
// Serialization prints doubles with %.17g so a config round-trips through
// save/load without loss.

#include <cctype>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fctl/common.hpp"

namespace fctl {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Keys understood by the experiment registry.  Kept in one place so both
// validation and --help stay in sync.
struct ConfigKeyDoc {
    const char* key;
    const char* doc;
};

inline const std::vector<ConfigKeyDoc>& config_key_docs() {
    static const std::vector<ConfigKeyDoc> docs = {
        {"problem", "registered problem name: heat-lq | nagumo-l2 | nagumo-nemytskii"},
        {"basis", "spatial discretization: spectral | fem (default depends on problem)"},
        {"fem_variant", "fem hat-function convention: corrected | truncated"},
        {"n", "basis resolution (cosine modes are 0..n; fem uses n elements)"},
        {"L", "domain length, interval (0, L)"},
        {"T", "time horizon"},
        {"dt", "time step; T/dt must be an integer"},
        {"sigma", "additive noise intensity"},
        {"nu", "weight of the quadratic control penalty"},
        {"u0", "initial state: indicator:a:b | constant:c | zero"},
        {"family", "feedback ansatz: zero | linear-diagonal | one-layer-net | "
                   "two-layer-relu-net | rbf-nemytskii | riccati"},
        {"activation", "one-layer-net activation: tanh | relu"},
        {"hidden1", "first hidden width for net families"},
        {"hidden2", "second hidden width (two-layer-relu-net)"},
        {"rbf_neurons", "number of radial basis neurons (rbf-nemytskii)"},
        {"rbf_partition", "number of time cells for piecewise-constant rbf weights"},
        {"rbf_kappa", "radial basis bandwidth"},
        {"rbf_centers", "rbf center handling: trainable | fixed"},
        {"cutoff_radius", "state cutoff radius for net families; 0 disables"},
        {"random_output", "1 draws the output layer randomly instead of zero init"},
        {"step", "base SGD step size"},
        {"decay_tau", "step decay scale: step_i = step / (1 + i / decay_tau); 0 disables"},
        {"rho", "stopping threshold; training stops once the gradient norm estimate drops below it"},
        {"batch", "Monte Carlo batch size per gradient step"},
        {"max_iters", "maximum SGD iterations"},
        {"eval_batch", "sample count for cost evaluation"},
        {"snapshot_every", "record training history every this many iterations"},
        {"seed", "master RNG seed"},
        {"jobs", "worker threads for Monte Carlo batches"},
        {"sim_paths", "trajectories to dump under the simulate command"},
        {"dump_controls", "1 also dumps realized control slices under simulate"},
    };
    return docs;
}

inline const std::set<std::string>& config_known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k;
        for (const auto& d : config_key_docs()) k.insert(d.key);
        return k;
    }();
    return keys;
}

// Holds raw string values keyed by name.  Typed accessors parse on demand
// and throw ConfigError on malformed or out-of-range values.
class ExperimentConfig {
  public:
    static ExperimentConfig from_string(const std::string& text) {
        ExperimentConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            cfg.set(key, value);
        }
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str());
    }

    void set(const std::string& key, const std::string& value) {
        if (!config_known_keys().count(key)) throw ConfigError("unknown config key: " + key);
        values_[key] = value;
    }

    // Applies a command-line override of the form "key=value".
    void apply_override(const std::string& assignment) {
        auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must look like key=value: " + assignment);
        set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key: " + key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_double(key, it->second);
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_int(key, it->second);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& s = it->second;
        try {
            std::size_t pos = 0;
            std::uint64_t v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected unsigned integer, got '" + s + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "1" || it->second == "true") return true;
        if (it->second == "0" || it->second == "false") return false;
        throw ConfigError("config key " + key + ": expected 0/1/true/false, got '" + it->second + "'");
    }

    void set_double(const std::string& key, double v) { set(key, detail::format_double(v)); }
    void set_int(const std::string& key, long v) { set(key, std::to_string(v)); }
    void set_u64(const std::string& key, std::uint64_t v) { set(key, std::to_string(v)); }

    // Writes keys in sorted order, one per line.
    std::string serialize() const {
        std::ostringstream out;
        for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
        return out.str();
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
        return a.values_ == b.values_;
    }

  private:
    static double parse_double(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected number, got '" + s + "'");
        }
    }

    static long parse_int(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            long v = std::stol(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected integer, got '" + s + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace fctl
