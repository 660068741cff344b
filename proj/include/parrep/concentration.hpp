#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "parrep/pmf.hpp"
#include "parrep/rng.hpp"

namespace parrep {

// exp(-2t^2 / sum (b_i - a_i)^2), doubled when two-sided. All bounds clamp to 1.
double hoeffding_bound(const std::vector<std::pair<double, double>>& ranges, double t, bool two_sided);

// 2 exp(-t^2 / (2 (v + b t / 3)))
double variance_bound(double v, double b, double t);

// 4 exp(-p mu^2 gamma^2 / (5 ell^2 n))
double scaled_bernoulli_bound(double p, double mu, double gamma, double ell, int n);

// A Monte Carlo domination check: each trial draws one sum and reports
// whether it landed in the tail the bound covers.
struct TailScenario {
    std::string label;
    double bound = 0.0;
    std::function<bool(RngStream&)> exceeds;
};

// Fixed parameter sets: 100 uniform summands (Hoeffding, t = 5 and 10),
// weighted Bernoulli sums (variance bound), and Z = sum (L_i / p_i) Bern(p_i)
// with L_i, p_i in [1/2, 1], n = 100, gamma in {1/4, 1/2, 3/4, 1}.
std::vector<TailScenario> tail_scenarios();

struct SmoothSampling {
    double lhs = 0.0;  // E_{x_{<i} ~ P|W} [1 / P[W | x_{<i}]]
    double rhs = 0.0;  // 1 / P[W]
};

// Outcomes are tuples; i counts the prefix coordinates kept (0 = empty prefix).
template <class T, class Pred>
SmoothSampling smooth_sampling_check(const FinitePmf<std::vector<T>>& p, const Pred& w, std::size_t i) {
    double pw = p.mass(w);
    if (!(pw > 0.0)) throw ZeroProbabilityEvent("smooth_sampling_check: P[W] = 0");
    std::map<std::vector<T>, std::pair<double, double>> by_prefix;  // (P[x<i], P[x<i, W])
    for (const auto& [x, q] : p) {
        if (i > x.size()) throw BadCoordinate("smooth_sampling_check: prefix longer than tuple");
        auto& e = by_prefix[std::vector<T>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i))];
        e.first += q;
        if (w(x)) e.second += q;
    }
    SmoothSampling out;
    out.rhs = 1.0 / pw;
    for (const auto& [pre, e] : by_prefix) {
        if (e.second <= 0.0) continue;
        out.lhs += (e.second / pw) * (e.first / e.second);
    }
    return out;
}

}  // namespace parrep
