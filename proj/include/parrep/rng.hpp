#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace parrep {

// One stream per worker; never shared across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : eng_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

std::uint64_t mix64(std::uint64_t x);

// Stable across platforms, unlike std::hash.
std::uint64_t hash_label(std::string_view label);

// Per-trial seed: hash(master, experiment, trial index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view experiment,
                          std::uint64_t index);

}  // namespace parrep
