#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "parrep/harness.hpp"

using namespace parrep;

namespace {

ExperimentConfig config_for(const std::string& name, std::map<std::string, std::string> kv) {
    ExperimentConfig c;
    c.experiment = name;
    apply_settings(c, kv);
    return c;
}

// csv carries no bound_ref column
bool same_metrics(const std::vector<MetricRecord>& a, const std::vector<MetricRecord>& b, double tol, bool refs = true) {
    if (a.size() != b.size()) return false;
    auto close = [tol](double x, double y) {
        if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
        if (std::isinf(x) || std::isinf(y)) return x == y;
        return std::abs(x - y) <= tol * std::max(1.0, std::abs(x));
    };
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].name != b[k].name || a[k].verdict != b[k].verdict) return false;
        if (refs && a[k].bound_ref != b[k].bound_ref) return false;
        if (!close(a[k].estimate, b[k].estimate) || !close(a[k].ci_low, b[k].ci_low) || !close(a[k].ci_high, b[k].ci_high))
            return false;
        if (a[k].bound.has_value() != b[k].bound.has_value()) return false;
        if (a[k].bound && !close(*a[k].bound, *b[k].bound)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("config text") {
    auto kv = parse_config_text("# comment\nm = 4\n\neps=0.1   # trailing\nseed=7\n");
    CHECK(kv.at("m") == "4");
    CHECK(kv.at("eps") == "0.1");
    CHECK(kv.at("seed") == "7");
    CHECK_THROWS_AS(parse_config_text("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("=3\n"), ConfigError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/parrep.cfg"), ConfigError);
}

TEST_CASE("later settings win") {
    ExperimentConfig c;
    apply_settings(c, {{"seed", "3"}, {"trials", "10"}, {"format", "csv"}});
    apply_settings(c, {{"trials", "20"}, {"workers", "2"}});
    CHECK(c.seed == 3);
    CHECK(c.format == "csv");
    CHECK(c.workers == 2);
    CHECK(c.integer("trials", 0) == 20);
    CHECK(c.real("eps", 0.5) == 0.5);
    CHECK(c.reals("lambda", {0.1}) == std::vector<double>{0.1});
    apply_settings(c, {{"lambda", "0.05,0.25"}});
    CHECK(c.reals("lambda", {}) == std::vector<double>{0.05, 0.25});

    CHECK_THROWS_AS(apply_settings(c, {{"seed", "abc"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(c, {{"format", "xml"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(c, {{"workers", "0"}}), ConfigError);
    apply_settings(c, {{"trials", "1.5"}});
    CHECK_THROWS_AS(c.integer("trials", 0), ConfigError);
    apply_settings(c, {{"eps", "x"}});
    CHECK_THROWS_AS(c.real("eps", 0), ConfigError);
}

TEST_CASE("bad experiment configs") {
    CHECK_THROWS_AS(run_experiment(config_for("nope", {})), ConfigError);
    CHECK_THROWS_AS(run_experiment(config_for("soundness", {{"trials", "0"}})), ConfigError);
    CHECK_THROWS_AS(run_experiment(config_for("martingale", {{"lambda", "0.3"}})), ConfigError);
    CHECK_THROWS_AS(run_experiment(config_for("bad-t", {{"t", "-1"}, {"trials", "2"}})), ConfigError);
    CHECK_THROWS_AS(run_experiment(config_for("attack-curve", {{"n", "1"}})), ConfigError);
    CHECK_THROWS_AS(run_experiment(config_for("skewed-exact", {{"instance", "/nonexistent"}})), ConfigError);
}

TEST_CASE("instance files") {
    auto in = parse_instance("2 2\ncol 1: 0,0 0.25 0,1 0.25 1,0 0.25 1,1 0.25\ncol 2: 0,0 0.5 1,1 0.5\nW xor-zero\nfamily rt\n");
    CHECK(in.base.m == 2);
    CHECK(in.base.n == 2);
    CHECK(in.base.columns[1].size() == 2);
    CHECK(in.fam.events.size() == 4);
    CHECK_THROWS_AS(parse_instance("2 2\ncol 1: 0,0 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_instance("2 1\ncol 1: 0 1.0\nW full\nfamily full\n"), ConfigError);
    CHECK_THROWS_AS(parse_instance("1 1\ncol 3: 0 1.0\n"), ConfigError);
    CHECK_THROWS_AS(parse_instance("1 1\ncol 1: 0 1.0\nW nosuch\n"), ConfigError);
}

TEST_CASE("soundness on the always-accept verifier") {
    auto r = run_experiment(config_for("soundness", {{"trials", "500"}, {"m", "3"}, {"n", "2"}}));
    REQUIRE_FALSE(r.metrics.empty());
    CHECK(r.metrics[0].estimate == 1.0);
    CHECK(r.metrics[0].verdict == "pass");
    CHECK(r.all_pass());
}

TEST_CASE("report round trips") {
    auto r = run_experiment(config_for("concentration", {{"trials", "200"}, {"instances", "5"}}));
    REQUIRE(r.metrics.size() > 2);

    auto j = nlohmann::json::parse(emit_report(r, "json"));
    CHECK(j.at("config").at("experiment") == "concentration");
    CHECK(same_metrics(r.metrics, metrics_from_json(j), 0.0));
    CHECK(same_metrics(r.metrics, metrics_from_csv(emit_report(r, "csv")), 1e-12, false));

    const std::string path = "parrep_roundtrip_test.csv";
    write_report(r, "csv", path);
    std::ifstream f(path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(same_metrics(r.metrics, metrics_from_csv(text), 1e-12, false));
    std::remove(path.c_str());
    // workers never reach the report
    CHECK_FALSE(report_json(r, false).dump().find("workers") != std::string::npos);
}

TEST_CASE("worker count does not change results") {
    for (const auto& name : std::vector<std::string>{"soundness", "martingale", "skewed-exact"}) {
        // skewed-exact counts instances, not trials
        std::map<std::string, std::string> kv{{"trials", name == "skewed-exact" ? "20" : "300"}, {"seed", "17"}};
        auto c1 = config_for(name, kv);
        auto c3 = c1;
        c3.workers = 3;
        auto a = run_experiment(c1), b = run_experiment(c3);
        CHECK_MESSAGE(same_metrics(a.metrics, b.metrics, 0.0), name);
        CHECK(report_json(a, false) == report_json(b, false));
    }
    std::function<long(long)> sq = [](long t) { return t * t; };
    auto one = parallel_map<long>(50, 1, sq), four = parallel_map<long>(50, 4, sq);
    CHECK(one == four);
    std::function<long(long)> boom = [](long t) -> long {
        if (t == 7) throw std::runtime_error("boom");
        return t;
    };
    CHECK_THROWS(parallel_map<long>(20, 3, boom));
}
