#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>

#include "parrep/protocol.hpp"

namespace parrep {

// Ideal public-key encryption: a keyed bijection from (bit, randomness) to
// opaque ids. Enc is deterministic so verifiers can re-encrypt a claimed
// opening; Dec is a table lookup and every call is logged.
class IdealPKE {
public:
    explicit IdealPKE(std::uint64_t key) : key_(key) {}

    std::uint64_t enc(int b, std::uint64_t r);
    std::optional<std::pair<int, std::uint64_t>> dec(std::uint64_t c);

    long enc_calls() const { return enc_calls_; }
    long dec_calls() const { return dec_calls_; }

private:
    std::uint64_t key_;
    std::unordered_map<std::uint64_t, std::pair<int, std::uint64_t>> table_;
    long enc_calls_ = 0;
    long dec_calls_ = 0;
};

struct CEParams {
    int m = 4;
    double eps = 0.1;
    int n = 40;
    int kappa = 32;  // bits of encryption randomness

    void validate() const;
};

// One copy of the counterexample protocol. Row 0 holds (active bit, b, r).
// Inactive: send bottom and accept. Active: send Enc(b, r), expect n-1
// ciphertexts; then reveal (b, r), expect their openings; later rounds are
// dummies. Accept iff every opening re-encrypts to its ciphertext, none equals
// Enc(b, r), and b is the xor of the opened bits.
VerifierSpec ce_verifier(const CEParams& p, std::shared_ptr<IdealPKE> pke);

// Decrypts and answers consistently.
ProverStrategy ce_honest_prover(const CEParams& p, std::shared_ptr<IdealPKE> pke);
// Commits to n-1 random bits in round 1 and opens them in round 2.
ProverStrategy ce_naive_prover(const CEParams& p, std::shared_ptr<IdealPKE> pke);
// n-fold prover against parallel_repeat(random_terminating_wrap(ce_verifier), n).
// Never calls Dec.
MultiProverStrategy ce_attacker(const CEParams& p, std::shared_ptr<IdealPKE> pke);

double ce_naive_success(double eps);
// Exact success of ce_attacker, summed over the number of active copies.
double ce_attack_success(const CEParams& p);
double lower_bound_value(double eps, int n, int m);

struct CEEstimate {
    SoundnessEstimate est;
    long dec_calls = 0;  // summed over trials
};

// One trial each; a fresh IdealPKE keyed from the trial seed. dec_calls gets
// the number of Dec calls made during the trial.
bool ce_single_trial(const CEParams& p, const std::string& prover, std::uint64_t seed, long t, long* dec_calls);
bool ce_attack_trial(const CEParams& p, std::uint64_t seed, long t, long* dec_calls);

// A fresh IdealPKE per trial, keyed from the trial seed.
CEEstimate ce_single_copy(const CEParams& p, const std::string& prover, long trials, std::uint64_t seed);
CEEstimate ce_parallel_attack(const CEParams& p, long trials, std::uint64_t seed);

}  // namespace parrep
