#include "parrep/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parrep {

namespace {

void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda <= 0.25)) throw std::domain_error("lambda must lie in (0, 1/4]");
}

double small_part(double r) { return std::min(std::abs(r), r * r); }

// Builds a path from a ratio rule R_i = rule(history, rng).
template <class Rule>
MartingalePath ratio_path(int n, RngStream& rng, Rule&& rule) {
    MartingalePath p;
    p.Y.reserve(static_cast<std::size_t>(n + 1));
    p.Y.push_back(1.0);
    for (int i = 0; i < n; ++i) {
        double y = p.Y.back();
        if (y == 0.0) {
            p.Y.push_back(0.0);  // absorbed
            continue;
        }
        p.Y.push_back(y * (1.0 + rule(p.Y, rng)));
    }
    return p;
}

struct Welford {
    long k = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double v) {
        ++k;
        double d = v - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (v - mean);
    }
    double se() const { return k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0; }
};

}  // namespace

double lemma_bound(double mu, double lambda) {
    check_lambda(lambda);
    return 23.0 * mu / (lambda * lambda);
}

double prop_bound(double esum, double lambda) {
    check_lambda(lambda);
    return 150.0 * esum / (lambda * lambda);
}

PathStats path_stats(const MartingalePath& path) {
    PathStats st;
    for (std::size_t i = 1; i < path.Y.size(); ++i) {
        st.max_dev = std::max(st.max_dev, std::abs(path.Y[i] - 1.0));
        double prev = path.Y[i - 1];
        double r = prev != 0.0 ? path.Y[i] / prev - 1.0 : 0.0;
        st.mu_term += small_part(r);
    }
    for (std::size_t i = 0; i < path.Z.size(); ++i) st.esum_term += small_part(path.Z[i]) + small_part(path.T[i]);
    return st;
}

PathStats exceedance_trial(const MartingaleGenerator& gen, std::uint64_t seed, long t) {
    RngStream rng(derive_seed(seed, gen.label, static_cast<std::uint64_t>(t)));
    return path_stats(gen.sample(rng));
}

ExceedanceReport summarize_exceedance(const std::string& label, const std::vector<double>& lambdas,
                                      const std::vector<PathStats>& stats) {
    for (double l : lambdas) check_lambda(l);
    if (stats.empty()) throw std::invalid_argument("summarize_exceedance: no trials");
    ExceedanceReport rep;
    rep.label = label;
    rep.trials = static_cast<long>(stats.size());
    std::vector<long> hits(lambdas.size(), 0);
    Welford mu, es;
    for (const auto& st : stats) {
        for (std::size_t k = 0; k < lambdas.size(); ++k)
            if (st.max_dev >= lambdas[k]) ++hits[k];
        mu.add(st.mu_term);
        es.add(st.esum_term);
    }
    const double trials = static_cast<double>(stats.size());
    rep.mu_hat = mu.mean;
    rep.se_mu = mu.se();
    rep.esum_hat = es.mean;
    rep.se_esum = es.se();
    double half = std::sqrt(std::log(2.0 / 0.003) / (2.0 * trials));
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        ExceedanceEstimate est;
        est.lambda = lambdas[k];
        est.p_hat = static_cast<double>(hits[k]) / trials;
        est.se_p = std::sqrt(est.p_hat * (1.0 - est.p_hat) / trials);
        est.ci_low = std::max(0.0, est.p_hat - half);
        est.ci_high = std::min(1.0, est.p_hat + half);
        rep.per_lambda.push_back(est);
    }
    return rep;
}

ExceedanceReport empirical_exceedance(const MartingaleGenerator& gen, const std::vector<double>& lambdas,
                                      long trials, std::uint64_t seed) {
    for (double l : lambdas) check_lambda(l);
    std::vector<PathStats> stats;
    stats.reserve(static_cast<std::size_t>(trials));
    for (long t = 0; t < trials; ++t) stats.push_back(exceedance_trial(gen, seed, t));
    return summarize_exceedance(gen.label, lambdas, stats);
}

double martingale_self_test(const MartingaleGenerator& gen, long trials, std::uint64_t seed) {
    std::vector<Welford> plain(static_cast<std::size_t>(gen.length)), signed_(static_cast<std::size_t>(gen.length));
    for (long t = 0; t < trials; ++t) {
        RngStream rng(derive_seed(seed, gen.label + "/self", static_cast<std::uint64_t>(t)));
        auto path = gen.sample(rng);
        for (int i = 1; i <= gen.length; ++i) {
            double d = path.Y[static_cast<std::size_t>(i)] - path.Y[static_cast<std::size_t>(i - 1)];
            double prev = path.Y[static_cast<std::size_t>(i - 1)] - 1.0;
            plain[static_cast<std::size_t>(i - 1)].add(d);
            signed_[static_cast<std::size_t>(i - 1)].add(prev > 0 ? d : (prev < 0 ? -d : 0.0));
        }
    }
    double worst = 0.0;
    for (auto* v : {&plain, &signed_})
        for (const auto& w : *v)
            if (w.se() > 0.0) worst = std::max(worst, std::abs(w.mean) / w.se());
    return worst;
}

MartingaleGenerator gen_constant(int n) {
    return {"constant", n, false, [n](RngStream&) {
                MartingalePath p;
                p.Y.assign(static_cast<std::size_t>(n + 1), 1.0);
                return p;
            }};
}

MartingaleGenerator gen_iid_pm(double step, int n) {
    return {"iid-pm", n, false, [=](RngStream& rng) {
                return ratio_path(n, rng, [step](const std::vector<double>&, RngStream& r) {
                    return r.bernoulli(0.5) ? step : -step;
                });
            }};
}

MartingaleGenerator gen_survival(int m) {
    return {"survival-m" + std::to_string(m), m, false, [m](RngStream& rng) {
                return ratio_path(m, rng, [m](const std::vector<double>&, RngStream& r) {
                    return r.bernoulli(1.0 / m) ? -1.0 : 1.0 / (m - 1);
                });
            }};
}

MartingaleGenerator gen_random_ratio(int n) {
    return {"random-ratio", n, false, [n](RngStream& rng) {
                return ratio_path(n, rng, [](const std::vector<double>&, RngStream& r) {
                    double q = 0.1 + 0.8 * r.uniform();
                    // capped so the down step stays above -0.3
                    double b = 0.3 * r.uniform() * std::min(1.0, (1.0 - q) / q);
                    // +b w.p. q, -bq/(1-q) otherwise: mean zero
                    return r.bernoulli(q) ? b : -b * q / (1.0 - q);
                });
            }};
}

MartingaleGenerator gen_zt(int n, double a, double c) {
    return {"zt", n, true, [=](RngStream& rng) {
                MartingalePath p;
                p.Y.push_back(1.0);
                for (int i = 0; i < n; ++i) {
                    double y = p.Y.back();
                    double t = c * std::tanh(y - 1.0);  // depends on the history only
                    double z = t + (rng.bernoulli(0.5) ? a : -a);
                    p.T.push_back(t);
                    p.Z.push_back(z);
                    p.Y.push_back(y * (1.0 + z) / (1.0 + t));
                }
                return p;
            }};
}

MartingaleGenerator gen_heavy_jump(int n, double K, double pj) {
    return {"heavy-jump", n, false, [=](RngStream& rng) {
                return ratio_path(n, rng, [=](const std::vector<double>&, RngStream& r) {
                    return r.bernoulli(pj) ? K - 1.0 : -pj * (K - 1.0) / (1.0 - pj);
                });
            }};
}

std::vector<MartingaleGenerator> shipped_generators() {
    return {gen_iid_pm(0.05, 50), gen_survival(4),        gen_survival(10),
            gen_random_ratio(30), gen_zt(40, 0.04, 0.02), gen_heavy_jump(20, 5.0, 0.01)};
}

}  // namespace parrep
