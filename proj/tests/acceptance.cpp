// Full-scale acceptance run. One PASS/FAIL line per criterion; exit status 1
// if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "checks.hpp"
#include "parrep/counterexample.hpp"
#include "parrep/harness.hpp"
#include "properties.hpp"

using namespace parrep;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

Outcome from_sweep(const props::Sweep& s) {
    std::string d = std::to_string(s.checked) + " checks, " + std::to_string(s.violations) + " violations, worst " + fmt(s.worst);
    if (!s.ok()) d += "; first: " + s.first;
    return {s.ok() && s.checked > 0, d};
}

ExperimentReport run(const std::string& name, std::map<std::string, std::string> kv, int workers = 1) {
    ExperimentConfig c;
    c.experiment = name;
    c.seed = 20240601;
    apply_settings(c, kv);
    c.workers = workers;
    return run_experiment(c);
}

const MetricRecord* find(const ExperimentReport& r, const std::string& name) {
    for (const auto& m : r.metrics)
        if (m.name == name) return &m;
    return nullptr;
}

// Every metric must pass; failures are listed in the detail.
Outcome all_metrics(const ExperimentReport& r, const std::vector<std::string>& required) {
    Outcome o{true, std::to_string(r.metrics.size()) + " metrics"};
    for (const auto& name : required)
        if (!find(r, name)) {
            o.pass = false;
            o.detail += "; missing " + name;
        }
    for (const auto& m : r.metrics)
        if (m.verdict == "fail") {
            o.pass = false;
            o.detail += "; " + m.name + "=" + fmt(m.estimate) + (m.bound ? " vs " + fmt(*m.bound) : "");
        }
    return o;
}

Outcome c1() {
    RngStream rng(101);
    return from_sweep(props::kl_suite(rng, 200));
}

Outcome c2() { return from_sweep(props::bernoulli_grid()); }

Outcome c3() {
    RngStream rng(103);
    return from_sweep(props::small_events(rng, 50));
}

Outcome c4() {
    RngStream rng(104);
    return from_sweep(props::transport(rng, 50));
}

Outcome c5() {
    auto r = run("skewed-exact", {{"trials", "120"}});
    auto o = all_metrics(r, {"instances-undefined", "q-j-uniform", "omega-proportional", "omega-first-round", "gamma-mean",
                             "u-martingale", "v-martingale", "omega-identity", "budget", "budget-prefix",
                             "w-full-degenerate"});
    o.detail = "120 instances, " + o.detail;
    return o;
}

Outcome c6() {
    // same seed, so the same 120 instances as criterion 5
    auto r = run("smoothkl-cert", {{"trials", "120"}});
    auto o = all_metrics(r, {"fcut-alpha", "fcut-divergence", "small-event"});
    if (auto* e = find(r, "events-checked")) o.detail += ", " + fmt(e->estimate) + " events";
    return o;
}

Outcome c7() {
    auto r = run("martingale", {{"trials", "100000"}, {"lambda", "0.05,0.1,0.25"}});
    long bounds = 0;
    for (const auto& m : r.metrics) bounds += m.verdict == "pass" || m.verdict == "fail" ? 1 : 0;
    auto o = all_metrics(r, {"iid-pm-lambda0.05", "survival-m4-lambda0.25", "survival-m10-lambda0.1"});
    o.detail += ", " + std::to_string(bounds) + " bounded";
    return o;
}

Outcome c8() {
    auto r = run("concentration", {{"trials", "100000"}, {"instances", "100"}});
    return all_metrics(r, {"smooth-sampling-identity"});
}

Outcome c9() {
    auto r = checks::simulator_check(100000, 109);
    bool ok = r.max_tv <= 0.02;
    std::string d = "max tv " + fmt(r.max_tv) + " (<= 0.02); density";
    for (std::size_t k = 0; k < r.density.size(); ++k) {
        ok = ok && std::abs(r.density[k] - r.want_density) <= 3 * r.density_se[k];
        d += " " + fmt(r.density[k]);
    }
    d += " vs " + fmt(r.want_density);
    return {ok, d};
}

Outcome c10() {
    auto r = checks::attack_law_check(2, 100000, 110);
    double cap_rate = static_cast<double>(r.caps) / static_cast<double>(r.runs);
    bool ok = r.tv <= 0.02 && cap_rate < 0.001;
    return {ok, "tv " + fmt(r.tv) + " (<= 0.02) over " + std::to_string(r.support) + " outcomes, cap rate " +
                    fmt(cap_rate) + ", accept " + fmt(r.accept_rate)};
}

Outcome c11() {
    auto r = run("soundness", {{"protocol", "ce"}, {"trials", "100000"}, {"eps", "0.1"}, {"m", "4"}, {"n", "40"}});
    auto o = all_metrics(r, {"naive-accept-rate", "naive-below-1-eps"});
    if (auto* m = find(r, "naive-accept-rate")) o.detail += ", rate " + fmt(m->estimate) + " vs " + fmt(*m->bound);
    return o;
}

Outcome c12() {
    auto r = run("attack-curve", {{"trials", "100000"}, {"m", "4"}, {"eps", "0.1"}, {"n", "20,40,60,80"}});
    auto o = all_metrics(r, {"success-n40", "closed-form-gap-n40", "log-success-slope", "dec-calls"});
    if (auto* m = find(r, "success-n40")) o.detail += ", n=40 success " + fmt(m->estimate) + " vs bound " + fmt(*m->bound);
    if (auto* m = find(r, "log-success-slope")) o.detail += ", slope " + fmt(m->estimate) + " (|.| <= " + fmt(*m->bound) + ")";
    return o;
}

Outcome c13() {
    auto r = run("bad-t", {{"trials", "100"}, {"t", "2,4,8,16"}});
    Outcome o{!r.metrics.empty(), std::to_string(r.metrics.size()) + " diagnostics"};
    for (const auto& m : r.metrics)
        if (m.verdict != "report" || m.bound.has_value()) {
            o.pass = false;
            o.detail += "; " + m.name + " carries a verdict";
        }
    if (!find(r, "gap-implied-constant") || !find(r, "bad-t-times-t-t16")) {
        o.pass = false;
        o.detail += "; missing diagnostics";
    }
    if (auto* m = find(r, "gap-implied-constant")) o.detail += ", gap constant " + fmt(m->estimate);
    return o;
}

Outcome c14() {
    const std::vector<std::pair<std::string, std::map<std::string, std::string>>> runs = {
        {"soundness", {{"trials", "3000"}, {"protocol", "xor-guess/rt"}, {"n", "3"}}},
        {"soundness", {{"trials", "3000"}, {"protocol", "ce"}}},
        {"attack-curve", {{"trials", "2000"}, {"n", "8,16"}}},
        {"skewed-exact", {{"trials", "30"}}},
        {"smoothkl-cert", {{"trials", "30"}}},
        {"martingale", {{"trials", "3000"}}},
        {"concentration", {{"trials", "3000"}, {"instances", "20"}}},
        {"bad-t", {{"trials", "30"}}},
    };
    Outcome o{true, ""};
    for (const auto& [name, kv] : runs) {
        auto a = run(name, kv, 1), b = run(name, kv, 3);
        bool same = report_json(a, false) == report_json(b, false);
        o.pass = o.pass && same;
        o.detail += (o.detail.empty() ? "" : ", ") + name + (same ? " same" : " DIFFERS");
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"kl property suite", c1},
        {"bernoulli bounds grid", c2},
        {"small events", c3},
        {"smooth data processing transport", c4},
        {"skewed exact suite", c5},
        {"f_cut certificate", c6},
        {"martingale exceedance", c7},
        {"concentration facts", c8},
        {"simulator law", c9},
        {"attack law vs skewed distribution", c10},
        {"counterexample single copy", c11},
        {"counterexample parallel attack", c12},
        {"bad-t and gap diagnostics are report-only", c13},
        {"worker count reproducibility", c14},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += o.pass ? 0 : 1;
        std::printf("%s %2zu %s [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
