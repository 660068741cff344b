#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "parrep/skewed.hpp"

namespace parrep {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> params;  // m, n, eps, delta, trials, lambda, t, instance, protocol
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
    int workers = 1;  // never part of the report

    bool has(const std::string& k) const { return params.count(k) != 0; }
    std::string str(const std::string& k, const std::string& dflt) const;
    long integer(const std::string& k, long dflt) const;
    double real(const std::string& k, double dflt) const;
    // Comma separated list; a single value is a list of one.
    std::vector<double> reals(const std::string& k, const std::vector<double>& dflt) const;
};

const std::vector<std::string>& experiment_names();

// Flat key=value lines; '#' starts a comment. Keys are the long flag names.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::string& path);
// Fills cfg from key/value pairs (seed, out, format, workers, experiment go to
// their fields; everything else into params). Later calls overwrite.
void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

struct MetricRecord {
    std::string name;
    double estimate = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    std::optional<double> bound;
    std::string bound_ref;
    std::string verdict;  // pass, fail, report
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<MetricRecord> metrics;
    std::map<std::string, long> caps;
    double runtime_ms = 0.0;
    std::string schema = "1";
    std::string version = "parrep 0.1.0";

    bool all_pass() const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

nlohmann::json report_json(const ExperimentReport& r, bool with_runtime = true);
std::string report_csv(const ExperimentReport& r);
std::string emit_report(const ExperimentReport& r, const std::string& format);
void write_report(const ExperimentReport& r, const std::string& format, const std::string& path);
// Parse-back for round-trip checks.
std::vector<MetricRecord> metrics_from_json(const nlohmann::json& j);
std::vector<MetricRecord> metrics_from_csv(const std::string& text);

// Calls f(t) for t in [0, count) on `workers` threads and returns the results
// in index order, so the outcome is independent of the worker count.
template <class T>
std::vector<T> parallel_map(long count, int workers, const std::function<T(long)>& f) {
    std::vector<T> out(static_cast<std::size_t>(count));
    if (workers <= 1 || count < 2) {
        for (long t = 0; t < count; ++t) out[static_cast<std::size_t>(t)] = f(t);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w]() {
            try {
                for (long t = w; t < count; t += workers) out[static_cast<std::size_t>(t)] = f(t);
            } catch (...) {
                errs[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---- instance files ------------------------------------------------------------

// "m n", then "col j: outcome prob ..." per column (outcome = comma-separated
// row symbols), then "W <name> <params>" and "family <name> <params>".
// W builtins: full, cell i j s, colsums-equal, xor-zero. Families: full, rt,
// bitgrid k_1 ... k_{mn}.
struct Instance {
    BaseModel base;
    DenseFamily fam;
};

Instance parse_instance(const std::string& text);
Instance load_instance(const std::string& path);

}  // namespace parrep
