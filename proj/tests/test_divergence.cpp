#include "doctest.h"

#include <cmath>

#include "properties.hpp"

using namespace parrep;

TEST_CASE("kl basics") {
    auto p = make_pmf<int>({{0, 0.2}, {1, 0.8}});
    CHECK(kl(p, p) == 0.0);
    CHECK(kl(bernoulli(1.0), bernoulli(0.5)) == doctest::Approx(std::log(2.0)));
    CHECK(std::isinf(kl(bernoulli(0.5), bernoulli(0.0))));
    // zero P mass where Q is also zero contributes nothing
    CHECK(kl(bernoulli(0.0), bernoulli(0.0)) == 0.0);
}

TEST_CASE("conditional kl") {
    RngStream rng(2);
    auto pxy = props::random_pair_pmf(rng, 3, 2);
    CHECK(conditional_kl(pxy, pxy) == doctest::Approx(0.0));

    auto px = props::random_pmf(rng, 3), py = props::random_pmf(rng, 2), qy = props::random_pmf(rng, 2);
    CHECK(conditional_kl(product2(px, py), product2(px, qy)) == doctest::Approx(kl(py, qy)).epsilon(1e-12));

    // Q_X vanishes where P_X does not
    auto q0 = make_pmf<std::pair<int, int>>({{{0, 0}, 1.0}});
    auto p1 = make_pmf<std::pair<int, int>>({{{0, 0}, 0.5}, {{1, 0}, 0.5}});
    CHECK(std::isinf(conditional_kl(p1, q0)));
}

TEST_CASE("bern_kl") {
    for (double p : {0.0, 0.1, 0.5, 1.0}) CHECK(bern_kl(p, p) == 0.0);
    CHECK(bern_kl(1.0, 0.5) == doctest::Approx(std::log(2.0)));
    CHECK(std::isinf(bern_kl(0.5, 1.0)));
    CHECK_THROWS(bern_kl(1.5, 0.5));
    auto g = props::bernoulli_grid();
    CHECK(g.checked > 9000);
    CHECK(g.ok());
}

TEST_CASE("smooth certificates") {
    RngStream rng(4);
    auto p = props::random_pmf(rng, 6), q = props::random_pmf(rng, 6);

    auto id = smooth_cert_eval(p, q, identity_pair<int>());
    CHECK(id.alpha == 0.0);
    CHECK(id.div == doctest::Approx(kl(p, q)));

    RandomizedFn<int> sink = [](const int&) { return point_mass(Image<int>{Sentinel{{1}}}); };
    auto all = smooth_cert_eval(p, q, CutPair<int>{sink, sink});
    CHECK(all.alpha == doctest::Approx(1.0));
    CHECK(all.div == doctest::Approx(0.0));

    // a pair that moves mass to another universe point
    RandomizedFn<int> shift = [](const int& x) { return point_mass(Image<int>{(x + 1) % 6}); };
    CHECK_THROWS_AS(smooth_cert_eval(p, q, CutPair<int>{shift, shift}), SupportViolation);

    // random masking pair against a brute-force pushforward
    auto fp = props::random_mask(rng, 6), fq = props::random_mask(rng, 6);
    auto c = smooth_cert_eval(p, q, CutPair<int>{fp, fq});
    double alpha = 0.0;
    std::map<Image<int>, double> a, b;
    for (int x = 0; x < 6; ++x) {
        for (const auto& [z, w] : fp(x)) {
            a[z] += p.prob(x) * w;
            if (!(z == Image<int>{x})) alpha += p.prob(x) * w;
        }
        for (const auto& [z, w] : fq(x)) b[z] += q.prob(x) * w;
    }
    double d = 0.0;
    for (const auto& [z, w] : a)
        if (w > 0.0) d += b[z] > 0.0 ? w * std::log(w / b[z]) : INFINITY;
    CHECK(c.alpha == doctest::Approx(alpha).epsilon(1e-12));
    CHECK(c.div == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("small event bound") {
    auto p = make_pmf<int>({{0, 0.1}, {1, 0.9}});
    auto e = [](int x) { return x == 0; };
    CHECK(small_event_bound(SmoothCert{0.0, 0.0}, p, e) == doctest::Approx(0.2));
    auto none = [](int) { return false; };
    CHECK(small_event_bound(SmoothCert{0.01, 0.05}, p, none) == doctest::Approx(0.4));
    CHECK(std::isinf(small_event_bound(SmoothCert{0.0, kInf}, p, e)));

    RngStream rng(6);
    auto s = props::small_events(rng, 10);
    CHECK(s.checked > 0);
    CHECK_MESSAGE(s.ok(), s.first);
}

TEST_CASE("transport") {
    RngStream rng(8);
    auto p = props::random_pmf(rng, 6), q = props::random_pmf(rng, 6);
    CutPair<int> pair{props::random_mask(rng, 6), props::random_mask(rng, 6)};
    auto c = smooth_cert_eval(p, q, pair);

    std::function<FinitePmf<int>(const int&)> id = [](const int& x) { return point_mass(x); };
    auto g = smooth_dp_transport<int, int>(p, q, pair, id);
    auto c1 = smooth_cert_eval(p, q, g);
    CHECK(c1.alpha == doctest::Approx(c.alpha).epsilon(1e-9));
    CHECK(c1.div == doctest::Approx(c.div).epsilon(1e-9));

    std::function<FinitePmf<int>(const int&)> k = [](const int&) { return point_mass(0); };
    auto gk = smooth_dp_transport<int, int>(p, q, pair, k);
    CHECK(smooth_cert_eval(point_mass(0), point_mass(0), gk).div <= c.div + 1e-9);

    // H landing in the sentinel namespace
    std::function<FinitePmf<Image<int>>(const int&)> bad = [](const int&) {
        return point_mass(Image<int>{Sentinel{{7}}});
    };
    CHECK_THROWS_AS((smooth_dp_transport<int, Image<int>>(p, q, pair, bad)), InternalNamespaceError);

    auto s = props::transport(rng, 10);
    CHECK_MESSAGE(s.ok(), s.first);
}

TEST_CASE("kl property suite") {
    RngStream rng(10);
    auto s = props::kl_suite(rng, 30);
    CHECK(s.checked > 300);
    CHECK_MESSAGE(s.ok(), s.first);
}
