// Randomized property sweeps for the divergence facts. Shared by the unit
// tests (small counts) and the acceptance binary (full counts).
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "parrep/divergence.hpp"
#include "parrep/rng.hpp"

namespace props {

using namespace parrep;

struct Sweep {
    long checked = 0;
    long violations = 0;
    double worst = 0.0;  // largest excess seen (lhs - rhs for an upper bound)
    std::string first;

    // Records "lhs <= rhs + tol".
    void le(double lhs, double rhs, double tol, const char* what) {
        ++checked;
        double ex = lhs - rhs;
        if (std::isnan(ex)) ex = INFINITY;
        if (lhs == rhs) ex = 0.0;  // inf <= inf
        worst = std::max(worst, ex);
        if (ex > tol) {
            if (violations == 0) first = what;
            ++violations;
        }
    }
    void near(double a, double b, double tol, const char* what) {
        le(a, b, tol, what);
        le(b, a, tol, what);
    }
    bool ok() const { return violations == 0; }
};

inline FinitePmf<int> random_pmf(RngStream& rng, int k, double zero_p = 0.0) {
    std::vector<std::pair<int, double>> e;
    for (int x = 0; x < k; ++x) e.push_back({x, rng.bernoulli(zero_p) ? 0.0 : rng.uniform()});
    e[rng.below(static_cast<std::uint64_t>(k))].second += 0.05;
    return make_pmf(e);
}

using PairPmf = FinitePmf<std::pair<int, int>>;

inline PairPmf random_pair_pmf(RngStream& rng, int kx, int ky, double zero_p = 0.0) {
    std::vector<std::pair<std::pair<int, int>, double>> e;
    for (int x = 0; x < kx; ++x)
        for (int y = 0; y < ky; ++y) e.push_back({{x, y}, rng.bernoulli(zero_p) ? 0.0 : rng.uniform()});
    e[rng.below(e.size())].second += 0.05;
    return make_pmf(e);
}

inline std::vector<double> dense(const FinitePmf<int>& p, int k) {
    std::vector<double> v(static_cast<std::size_t>(k));
    for (int x = 0; x < k; ++x) v[static_cast<std::size_t>(x)] = p.prob(x);
    return v;
}

// P_{Y|X=x} as a dense vector; empty when P_X(x) = 0.
inline std::vector<double> slice(const PairPmf& p, int x, int ky) {
    std::vector<double> v(static_cast<std::size_t>(ky));
    double s = 0.0;
    for (int y = 0; y < ky; ++y) s += v[static_cast<std::size_t>(y)] = p.prob({x, y});
    if (s <= 0.0) return {};
    for (auto& q : v) q /= s;
    return v;
}

// Information inequality, monotonicity, chain rule (both forms), conditioning
// increases divergence, data processing, and the three conditioning facts.
inline Sweep kl_suite(RngStream& rng, int instances) {
    Sweep s;
    const double tol = 1e-9;
    for (int rep = 0; rep < instances; ++rep) {
        const int kx = 2 + static_cast<int>(rng.below(3)), ky = 2 + static_cast<int>(rng.below(3));
        // P may have zeros; Q has full support so everything stays finite.
        auto pxy = random_pair_pmf(rng, kx, ky, 0.2);
        auto qxy = random_pair_pmf(rng, kx, ky);
        auto px = first_marginal(pxy), qx = first_marginal(qxy);
        auto py = second_marginal(pxy), qy = second_marginal(qxy);
        const double d = kl(pxy, qxy);

        // library kl against the dense oracle
        {
            std::vector<double> a, b;
            for (int x = 0; x < kx; ++x)
                for (int y = 0; y < ky; ++y) {
                    a.push_back(pxy.prob({x, y}));
                    b.push_back(qxy.prob({x, y}));
                }
            s.near(d, oracle::kl_vec(a, b), tol, "kl vs oracle");
        }

        // information inequality
        s.le(0.0, d, tol, "kl >= 0");
        s.near(kl(pxy, pxy), 0.0, tol, "kl(P,P) = 0");
        if (total_variation(pxy, qxy) > 1e-6) s.le(0.0, d - 1e-14, 0.0, "kl > 0 when P != Q");

        // monotonicity
        s.le(kl(py, qy), d, tol, "monotonicity Y");
        s.le(kl(px, qx), d, tol, "monotonicity X");

        // chain rule, and its oracle form E_x kl(P_{Y|x}, Q_{Y|x})
        double ck = conditional_kl(pxy, qxy);
        s.near(d, kl(px, qx) + ck, tol, "chain rule");
        double ck_or = 0.0;
        for (int x = 0; x < kx; ++x) {
            auto a = slice(pxy, x, ky);
            if (a.empty()) continue;
            ck_or += px.prob(x) * oracle::kl_vec(a, slice(qxy, x, ky));
        }
        s.near(ck, ck_or, tol, "conditional kl vs oracle");

        // product form
        auto a1 = random_pmf(rng, kx), b1 = random_pmf(rng, kx), a2 = random_pmf(rng, ky), b2 = random_pmf(rng, ky);
        s.near(kl(product2(a1, a2), product2(b1, b2)), kl(a1, b1) + kl(a2, b2), tol, "chain rule, product form");

        // conditioning increases divergence: D(P_{Y|X} || Q_Y | P_X) >= D(P_Y || Q_Y)
        s.le(kl(py, qy), conditional_kl(pxy, product2(px, qy)), tol, "conditioning increases divergence");

        // data processing through a random channel
        {
            const int kz = 2 + static_cast<int>(rng.below(3));
            std::vector<std::vector<double>> ch;
            for (int x = 0; x < kx; ++x) ch.push_back(dense(random_pmf(rng, kz, 0.3), kz));
            auto push = [&](const FinitePmf<int>& p) {
                std::vector<double> out(static_cast<std::size_t>(kz), 0.0);
                for (int x = 0; x < kx; ++x)
                    for (int z = 0; z < kz; ++z)
                        out[static_cast<std::size_t>(z)] += p.prob(x) * ch[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)];
                return out;
            };
            s.le(oracle::kl_vec(push(px), push(qx)), kl(px, qx), tol, "data processing");
        }

        // D(P_{X|W} || P_X) <= ln(1/P[W])
        std::vector<bool> in_w(static_cast<std::size_t>(kx));
        for (auto&& b : in_w) b = rng.bernoulli(0.5);
        in_w[rng.below(static_cast<std::uint64_t>(kx))] = true;
        auto w = [&](int x) { return static_cast<bool>(in_w[static_cast<std::size_t>(x)]); };
        if (px.mass(w) > 0.0) {
            double pw = px.mass(w);
            s.le(kl(condition(px, w), px), std::log(1.0 / pw), tol, "conditioning on W costs ln(1/P[W])");

            // D(P_{X|S} || Q_X) <= (1/P(S)) (D(P_X || Q_X) + 1/e + 1)
            s.le(kl(condition(px, w), qx), (kl(px, qx) + 1.0 / std::exp(1.0) + 1.0) / pw, tol, "1/e + 1 fact");

            // E_{x ~ P_{X|W}} kl(P_{Y|x}, Q_{Y|x}) <= ck / P[W]
            double lhs = 0.0;
            for (int x = 0; x < kx; ++x) {
                if (!w(x) || px.prob(x) <= 0.0) continue;
                lhs += px.prob(x) / pw * oracle::kl_vec(slice(pxy, x, ky), slice(qxy, x, ky));
            }
            s.le(lhs, ck / pw, tol, "1/P[W] conditional fact");
        }
    }
    return s;
}

// Both Bernoulli branches on the 0.01-step grid.
inline Sweep bernoulli_grid() {
    Sweep s;
    for (int pi = 1; pi <= 99; ++pi) {
        for (int di = 1; di <= 99; ++di) {
            const double p = pi / 100.0, d = di / 100.0;
            s.le(d * d * p / 2.0, bern_kl((1.0 - d) * p, p), 0.0, "lower branch");
            if ((1.0 + d) * p <= 1.0)
                s.le(std::min(d, d * d) * p / 4.0, bern_kl((1.0 + d) * p, p), 0.0, "upper branch");
        }
    }
    return s;
}

// Masks each point to one of a few sentinels with a random probability.
inline RandomizedFn<int> random_mask(RngStream& rng, int k) {
    std::vector<FinitePmf<Image<int>>> table;
    for (int x = 0; x < k; ++x) {
        double a = rng.bernoulli(0.5) ? 0.0 : rng.uniform();
        std::vector<std::pair<Image<int>, double>> e{{Image<int>{x}, 1.0 - a}};
        if (a > 0.0) e.push_back({Image<int>{Sentinel{{static_cast<std::int64_t>(rng.below(3))}}}, a});
        table.push_back(make_pmf(e));
    }
    return [table](const int& x) { return table[static_cast<std::size_t>(x)]; };
}

// Q[E] < 2 max{alpha + P[E], 4 div} for every event (all subsets up to 16
// outcomes, 1000 random subsets otherwise). An event with Q[E] = 0 trivially
// satisfies the bound; the strict form is only checked when Q[E] > 0.
inline Sweep small_events(RngStream& rng, int instances) {
    Sweep s;
    for (int rep = 0; rep < instances; ++rep) {
        const int k = 2 + static_cast<int>(rng.below(31));
        auto p = random_pmf(rng, k, 0.2);
        auto q = random_pmf(rng, k, 0.2);
        CutPair<int> pair{random_mask(rng, k), random_mask(rng, k)};
        auto cert = smooth_cert_eval(p, q, pair);
        auto check = [&](std::uint64_t mask) {
            auto e = [mask](int x) { return ((mask >> x) & 1u) != 0; };
            double qe = q.mass(e);
            double b = small_event_bound(cert, p, e);
            if (qe <= 0.0) {
                s.le(0.0, b, 0.0, "small event, empty Q mass");
                return;
            }
            // strict: count equality as a violation
            s.le(qe, b, 0.0, "small event");
            if (qe == b) {
                ++s.violations;
                if (s.first.empty()) s.first = "small event, equality";
            }
        };
        if (k <= 16) {
            for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) check(mask);
        } else {
            for (int t = 0; t < 1000; ++t) check(rng.engine()() & ((1ull << k) - 1));
        }
    }
    return s;
}

// Transport through a random channel H: the new pair keeps the mask bound and
// does not increase the divergence, all by enumeration.
inline Sweep transport(RngStream& rng, int instances) {
    Sweep s;
    for (int rep = 0; rep < instances; ++rep) {
        const int k = 2 + static_cast<int>(rng.below(7));
        const int kz = 1 + static_cast<int>(rng.below(5));
        auto p = random_pmf(rng, k, 0.2);
        auto q = random_pmf(rng, k, 0.2);
        CutPair<int> pair{random_mask(rng, k), random_mask(rng, k)};
        auto cert = smooth_cert_eval(p, q, pair);
        std::vector<FinitePmf<int>> ch;
        for (int x = 0; x < k; ++x) ch.push_back(random_pmf(rng, kz, 0.4));
        std::function<FinitePmf<int>(const int&)> h = [ch](const int& x) { return ch[static_cast<std::size_t>(x)]; };
        auto g = smooth_dp_transport<int, int>(p, q, pair, h);
        auto push = [&](const FinitePmf<int>& t) {
            std::vector<std::pair<int, double>> e;
            for (const auto& [x, w] : t)
                for (const auto& [z, c] : ch[static_cast<std::size_t>(x)]) e.push_back({z, w * c});
            return make_pmf(e);
        };
        auto hp = push(p), hq = push(q);
        auto c2 = smooth_cert_eval(hp, hq, g);  // throws on a support violation
        s.le(c2.alpha, cert.alpha, 1e-9, "transport mask bound");
        s.le(c2.div, cert.div, 1e-9, "transport divergence");
        // oracle for the divergence: push through G by hand
        auto out = [&](const FinitePmf<int>& t, const RandomizedFn<int>& f) {
            std::map<Image<int>, double> acc;
            for (const auto& [y, w] : t)
                for (const auto& [z, c] : f(y)) acc[z] += w * c;
            return acc;
        };
        auto a = out(hp, g.f_p), b = out(hq, g.f_q);
        double dv = 0.0;
        for (const auto& [z, w] : a) {
            if (w <= 0.0) continue;
            double qb = b.count(z) ? b[z] : 0.0;
            dv += qb > 0.0 ? w * std::log(w / qb) : INFINITY;
        }
        s.near(c2.div, dv, 1e-9, "transported divergence vs oracle");
    }
    return s;
}

}  // namespace props
