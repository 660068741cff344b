#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "parrep/rng.hpp"

namespace parrep {

// One sampled path. Y[0] = 1. Z/T are filled for generators of the form
// Y_i = Y_{i-1}(1+Z_i)/(1+T_i); plain generators leave them empty.
struct MartingalePath {
    std::vector<double> Y;
    std::vector<double> Z;
    std::vector<double> T;
};

struct MartingaleGenerator {
    std::string label;
    int length = 0;
    bool has_zt = false;
    std::function<MartingalePath(RngStream&)> sample;
};

double lemma_bound(double mu, double lambda);    // 23 mu / lambda^2
double prop_bound(double esum, double lambda);   // 150 esum / lambda^2

struct ExceedanceEstimate {
    double lambda = 0.0;
    double p_hat = 0.0;
    double se_p = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // Hoeffding, 99.7%
};

struct ExceedanceReport {
    std::string label;
    long trials = 0;
    double mu_hat = 0.0, se_mu = 0.0;      // E[sum min(|R|, R^2)]
    double esum_hat = 0.0, se_esum = 0.0;  // E[sum min(|Z|,Z^2) + min(|T|,T^2)]
    std::vector<ExceedanceEstimate> per_lambda;
};

// Per-path summary: max_i |Y_i - 1|, sum min(|R|, R^2), and the Z/T sum.
struct PathStats {
    double max_dev = 0.0;
    double mu_term = 0.0;
    double esum_term = 0.0;
};

PathStats path_stats(const MartingalePath& path);
PathStats exceedance_trial(const MartingaleGenerator& gen, std::uint64_t seed, long t);
// Folds trial stats in index order.
ExceedanceReport summarize_exceedance(const std::string& label, const std::vector<double>& lambdas,
                                      const std::vector<PathStats>& stats);

// Trials are seeded by derive_seed(seed, label, t); results do not depend on
// evaluation order.
ExceedanceReport empirical_exceedance(const MartingaleGenerator& gen, const std::vector<double>& lambdas,
                                      long trials, std::uint64_t seed);

// Largest |mean(Y_i - Y_{i-1}) and mean((Y_i - Y_{i-1}) * sign(Y_{i-1} - 1))|
// in units of its standard error.
double martingale_self_test(const MartingaleGenerator& gen, long trials, std::uint64_t seed);

// ---- shipped families ------------------------------------------------------

MartingaleGenerator gen_constant(int n);
MartingaleGenerator gen_iid_pm(double step, int n);
// R = 1/(m-1) w.p. 1-1/m, else -1; length m
MartingaleGenerator gen_survival(int m);
// two-point steps with random (q, b) per step
MartingaleGenerator gen_random_ratio(int n);
// Y_i = Y_{i-1}(1+Z_i)/(1+T_i), T_i = c tanh(Y_{i-1}-1), Z_i = T_i +- a
MartingaleGenerator gen_zt(int n, double a, double c);
// R = K-1 w.p. p, else -p(K-1)/(1-p)
MartingaleGenerator gen_heavy_jump(int n, double K, double p);

std::vector<MartingaleGenerator> shipped_generators();

}  // namespace parrep
