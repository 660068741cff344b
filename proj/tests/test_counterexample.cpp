#include "doctest.h"

#include <cmath>

#include "parrep/counterexample.hpp"

using namespace parrep;

namespace {

double sigma(double p, long n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

// L ~ Bin(n, 3 eps) active copies. With L >= 1 the attacker wins when all of
// them halt after round 0 (each 1/m), or none does and then either the parity
// works out (1/2) or all halt later. E[c^L] = (1 - a + a c)^n, minus the L = 0
// term which the three pieces count twice over.
double attack_oracle(double eps, int n, int m) {
    const double a = 3 * eps, stay = 1.0 - 1.0 / m;
    const double later = 1.0 - std::pow(stay, m - 1);
    auto mgf = [&](double c) { return std::pow(1 - a + a * c, n); };
    return mgf(1.0 / m) + 0.5 * mgf(stay) + 0.5 * mgf(stay * later) - std::pow(1 - a, n);
}

// Copies the verifier's own ciphertext and opens it with the revealed (b, r).
class Replayer : public ProverSession {
public:
    OptMessage respond(int r, const std::vector<OptMessage>& vm, RngStream&) override {
        if (r == 0) {
            ct_ = (*vm[0])[0];
            return Message{ct_};
        }
        if (r == 1) return *vm[1];
        return Message{};
    }

private:
    std::int64_t ct_ = 0;
};

}  // namespace

TEST_CASE("single copy") {
    CEParams p{4, 0.1, 5, 32};
    const long n = 20000;
    auto honest = ce_single_copy(p, "honest", 2000, 1);
    CHECK(honest.est.p_hat == 1.0);
    CHECK(honest.dec_calls > 0);

    auto naive = ce_single_copy(p, "naive", n, 2);
    CHECK(std::abs(naive.est.p_hat - ce_naive_success(0.1)) <= 3 * sigma(0.85, n));
    CHECK(naive.dec_calls == 0);
    CHECK(ce_naive_success(0.1) == doctest::Approx(0.85));
    CHECK_THROWS(ce_single_copy(p, "other", 10, 1));
}

TEST_CASE("replaying the verifier's ciphertext rejects") {
    CEParams p{4, 0.1, 2, 32};
    auto pke = std::make_shared<IdealPKE>(99);
    auto v = ce_verifier(p, pke);
    RngStream rng(3);
    for (int k = 0; k < 50; ++k) {
        Column c(static_cast<std::size_t>(p.m), 0);
        c[0] = v.schema.encode(0, {1, k % 2, static_cast<std::int64_t>(rng.below(1u << 20))});
        Replayer rep;
        // the opening is valid and the parity matches; only the replay check fails
        CHECK_FALSE(run_protocol_with_coins(v, rep, c, rng).accepted);
    }
}

TEST_CASE("parameters") {
    CHECK_THROWS(CEParams{0, 0.1, 4, 32}.validate());
    CHECK_THROWS(CEParams{4, 0.5, 4, 32}.validate());
    CHECK_THROWS(CEParams{4, 0.1, 1, 32}.validate());
    CHECK_NOTHROW(CEParams{4, 0.1, 40, 32}.validate());
}

TEST_CASE("attack closed form") {
    for (int n : {2, 5, 20, 40, 80})
        for (double eps : {0.01, 0.1, 0.2})
            for (int m : {3, 4, 8}) {
                CEParams p{m, eps, n, 32};
                CHECK(ce_attack_success(p) == doctest::Approx(attack_oracle(eps, n, m)).epsilon(1e-10));
            }
    // no active copy: accept; eps -> 0 gives 1
    CHECK(ce_attack_success(CEParams{4, 1e-9, 3, 32}) == doctest::Approx(1.0));
}

TEST_CASE("attack simulation") {
    for (int n : {3, 10}) {
        CEParams p{4, 0.1, n, 32};
        const long trials = 20000;
        auto e = ce_parallel_attack(p, trials, 5);
        double want = ce_attack_success(p);
        CHECK(std::abs(e.est.p_hat - want) <= 3 * sigma(want, trials) + 1e-12);
        CHECK(e.dec_calls == 0);
    }
}

TEST_CASE("lower bound value") {
    CHECK(lower_bound_value(0.1, 4, 4) == doctest::Approx(std::pow(0.9, 14)));
    CHECK(lower_bound_value(0.1, 40, 4) == doctest::Approx(std::pow(0.9, 140)));
    CHECK(lower_bound_value(0.0, 40, 4) == 1.0);
    // the attack beats the bound at these sizes
    for (int n : {20, 40, 60, 80}) CHECK(ce_attack_success(CEParams{4, 0.1, n, 32}) > lower_bound_value(0.1, n, 4));
}

TEST_CASE("ideal encryption") {
    IdealPKE pke(7);
    auto c0 = pke.enc(0, 5), c1 = pke.enc(1, 5);
    CHECK(c0 != c1);
    CHECK(pke.enc(0, 5) == c0);
    auto d = pke.dec(c1);
    REQUIRE(d.has_value());
    CHECK(d->first == 1);
    CHECK(d->second == 5u);
    CHECK(pke.dec_calls() == 1);
    CHECK_FALSE(IdealPKE(8).dec(c0).has_value());
}
