#include "parrep/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parrep {

namespace {
double clamp1(double v) { return std::min(1.0, v); }
}  // namespace

double hoeffding_bound(const std::vector<std::pair<double, double>>& ranges, double t, bool two_sided) {
    if (t < 0.0) throw std::domain_error("hoeffding_bound: t < 0");
    double s = 0.0;
    for (const auto& [a, b] : ranges) {
        if (b < a) throw std::domain_error("hoeffding_bound: range with b < a");
        s += (b - a) * (b - a);
    }
    if (s == 0.0) return t > 0.0 ? 0.0 : 1.0;
    double v = std::exp(-2.0 * t * t / s);
    return clamp1(two_sided ? 2.0 * v : v);
}

double variance_bound(double v, double b, double t) {
    if (v < 0.0 || b < 0.0 || t < 0.0) throw std::domain_error("variance_bound: negative parameter");
    double den = 2.0 * (v + b * t / 3.0);
    if (den == 0.0) return t > 0.0 ? 0.0 : 1.0;
    return clamp1(2.0 * std::exp(-t * t / den));
}

double scaled_bernoulli_bound(double p, double mu, double gamma, double ell, int n) {
    if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("scaled_bernoulli_bound: p outside (0,1]");
    if (gamma < 0.0 || gamma > 1.0) throw std::domain_error("scaled_bernoulli_bound: gamma outside [0,1]");
    if (!(ell > 0.0) || n < 1) throw std::domain_error("scaled_bernoulli_bound: ell <= 0 or n < 1");
    return clamp1(4.0 * std::exp(-p * mu * mu * gamma * gamma / (5.0 * ell * ell * n)));
}

std::vector<TailScenario> tail_scenarios() {
    std::vector<TailScenario> out;

    std::vector<std::pair<double, double>> unit(100, {0.0, 1.0});
    for (double t : {5.0, 10.0}) {
        out.push_back({"hoeffding-uniform100-t" + std::to_string(static_cast<int>(t)), hoeffding_bound(unit, t, true),
                       [t](RngStream& rng) {
                           double s = 0.0;
                           for (int i = 0; i < 100; ++i) s += rng.uniform();
                           return std::abs(s - 50.0) >= t;
                       }});
    }

    {
        const int n = 50;
        std::vector<double> b(n);
        double v = 0.0;
        const double p = 0.1;
        for (int i = 0; i < n; ++i) {
            b[static_cast<std::size_t>(i)] = 0.5 + 0.5 * i / (n - 1.0);
            v += b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)] * p;
        }
        for (double k : {1.5, 2.5}) {
            double t = k * std::sqrt(v);
            out.push_back({"variance-bernoulli50-k" + std::to_string(k).substr(0, 3), variance_bound(v, 1.0, t),
                           [b, p, t](RngStream& rng) {
                               double x = 0.0;
                               for (double bi : b) x += bi * ((rng.bernoulli(p) ? 1.0 : 0.0) - p);
                               return std::abs(x) >= t;
                           }});
        }
    }

    {
        const int n = 100;
        RngStream setup(derive_seed(0x5eedULL, "scaled-bernoulli", 0));
        std::vector<double> L(n), P(n);
        double mu = 0.0, pmin = 1.0;
        for (int i = 0; i < n; ++i) {
            L[static_cast<std::size_t>(i)] = 0.5 + 0.5 * setup.uniform();
            P[static_cast<std::size_t>(i)] = 0.5 + 0.5 * setup.uniform();
            mu += L[static_cast<std::size_t>(i)];
            pmin = std::min(pmin, P[static_cast<std::size_t>(i)]);
        }
        for (double g : {0.25, 0.5, 0.75, 1.0}) {
            out.push_back({"scaled-bernoulli100-g" + std::to_string(g).substr(0, 4),
                           scaled_bernoulli_bound(pmin, mu, g, 1.0, n), [L, P, mu, g](RngStream& rng) {
                               double z = 0.0;
                               for (std::size_t i = 0; i < L.size(); ++i)
                                   if (rng.bernoulli(P[i])) z += L[i] / P[i];
                               return std::abs(z / mu - 1.0) >= g;
                           }});
        }
    }
    return out;
}

}  // namespace parrep
