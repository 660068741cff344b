#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "parrep/concentration.hpp"

using namespace parrep;

TEST_CASE("hoeffding") {
    std::vector<std::pair<double, double>> unit(100, {0.0, 1.0});
    CHECK(hoeffding_bound(unit, 0.0, false) == 1.0);
    CHECK(hoeffding_bound(unit, 10.0, false) == doctest::Approx(std::exp(-2.0)));
    CHECK(hoeffding_bound(unit, 10.0, true) == doctest::Approx(2 * std::exp(-2.0)));
    double prev = 1.0;
    for (double t = 0; t < 30; t += 0.5) {
        double b = hoeffding_bound(unit, t, true);
        CHECK(b <= prev);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
        prev = b;
    }
    CHECK_THROWS(hoeffding_bound(unit, -1.0, false));
}

TEST_CASE("variance bound") {
    CHECK(variance_bound(1.0, 1.0, 0.0) == 1.0);
    // 2 exp(-9 / (2 (2 + 1)))
    CHECK(variance_bound(2.0, 1.0, 3.0) == doctest::Approx(2 * std::exp(-1.5)));
    double prev = 1.0;
    for (double t = 0; t < 20; t += 0.25) {
        double b = variance_bound(2.0, 1.0, t);
        CHECK(b <= prev);
        prev = b;
    }
}

TEST_CASE("scaled bernoulli bound") {
    CHECK(scaled_bernoulli_bound(0.5, 10.0, 0.0, 1.0, 10) == 1.0);
    CHECK(scaled_bernoulli_bound(0.5, 100.0, 0.5, 1.0, 100) == doctest::Approx(4 * std::exp(-0.5 * 1e4 * 0.25 / 500)));
    double prev = 1.0;
    for (double g = 0; g <= 1.0; g += 0.05) {
        double b = scaled_bernoulli_bound(0.7, 60.0, g, 1.0, 100);
        CHECK(b <= prev);
        prev = b;
    }
    CHECK_THROWS(scaled_bernoulli_bound(0.0, 1, 0.5, 1, 1));
}

TEST_CASE("tail scenarios dominate at small scale") {
    for (const auto& sc : tail_scenarios()) {
        CAPTURE(sc.label);
        long hits = 0;
        const long n = 4000;
        for (long t = 0; t < n; ++t) {
            RngStream rng(derive_seed(3, sc.label, static_cast<std::uint64_t>(t)));
            hits += sc.exceeds(rng) ? 1 : 0;
        }
        double p = static_cast<double>(hits) / n;
        CHECK(p <= sc.bound + 3 * std::sqrt(p * (1 - p) / n) + 1e-12);
    }
}

TEST_CASE("smooth sampling") {
    auto p = make_pmf<std::vector<int>>({{{0, 0}, 0.1}, {{0, 1}, 0.2}, {{1, 0}, 0.3}, {{1, 1}, 0.4}});
    auto full = [](const std::vector<int>&) { return true; };
    for (std::size_t i = 0; i <= 2; ++i) {
        auto s = smooth_sampling_check(p, full, i);
        CHECK(s.lhs == doctest::Approx(1.0));
        CHECK(s.rhs == doctest::Approx(1.0));
    }
    auto w = [](const std::vector<int>& x) { return x[1] == 1; };
    auto s0 = smooth_sampling_check(p, w, 0);
    CHECK(s0.lhs == doctest::Approx(1 / 0.6));

    // random 3-coordinate pmfs, prefixes of length 0..2. In general the left
    // side is P[prefix keeps some W mass] / P[W]; it equals 1/P[W] once W is
    // reachable from every prefix, which the second pass arranges.
    RngStream rng(7);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<std::pair<std::vector<int>, double>> e;
        for (int c = 0; c < 27; ++c) e.push_back({{c % 3, (c / 3) % 3, c / 9}, rng.bernoulli(0.2) ? 0.0 : rng.uniform()});
        e[0].second += 0.01;
        auto q = make_pmf(e);
        std::set<std::vector<int>> in;
        for (const auto& [x, m] : q)
            if (rng.bernoulli(0.3)) in.insert(x);
        in.insert(q.entries().front().first);
        for (int pass = 0; pass < 2; ++pass) {
            auto wp = [&](const std::vector<int>& x) { return in.count(x) != 0; };
            double pw = q.mass(wp);
            for (std::size_t i = 0; i <= 2; ++i) {
                std::map<std::vector<int>, std::pair<double, double>> pre;
                for (const auto& [x, m] : q) {
                    auto& a = pre[std::vector<int>(x.begin(), x.begin() + static_cast<long>(i))];
                    a.first += m;
                    if (wp(x)) a.second += m;
                }
                double live = 0.0;
                for (const auto& [k, a] : pre)
                    if (a.second > 0.0) live += a.first;
                auto s = smooth_sampling_check(q, wp, i);
                CHECK(std::abs(s.lhs - live / pw) <= 1e-9 * s.lhs);
                CHECK(s.rhs == doctest::Approx(1 / pw));
                if (pass == 1) CHECK(std::abs(s.lhs - s.rhs) <= 1e-9 * s.rhs);
            }
            // every length-2 prefix gets one W completion
            std::map<std::vector<int>, bool> hit;
            for (const auto& [x, m] : q) hit[{x[0], x[1]}] = hit[{x[0], x[1]}] || (m > 0.0 && in.count(x));
            for (const auto& [x, m] : q)
                if (m > 0.0 && !hit[{x[0], x[1]}]) {
                    in.insert(x);
                    hit[{x[0], x[1]}] = true;
                }
        }
    }
    auto never = [](const std::vector<int>&) { return false; };
    CHECK_THROWS_AS(smooth_sampling_check(p, never, 1), ZeroProbabilityEvent);
}
