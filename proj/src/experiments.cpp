#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "parrep/attack.hpp"
#include "parrep/concentration.hpp"
#include "parrep/counterexample.hpp"
#include "parrep/harness.hpp"
#include "parrep/martingale.hpp"

namespace parrep {

namespace {

using Report = ExperimentReport;

std::string num_label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

MetricRecord metric(std::string name, double est, double lo, double hi, std::optional<double> bound,
                    std::string ref, std::string verdict) {
    return {std::move(name), est, lo, hi, bound, std::move(ref), std::move(verdict)};
}

// Error-style metric: pass iff est <= tol.
MetricRecord residual(const std::string& name, double est, double tol, const std::string& ref) {
    return metric(name, est, est, est, tol, ref, est <= tol ? "pass" : "fail");
}

struct Rate {
    long trials = 0;
    long hits = 0;
    double p = 0.0, se = 0.0, lo = 0.0, hi = 0.0;
};

Rate rate(const std::vector<char>& v) {
    Rate r;
    r.trials = static_cast<long>(v.size());
    for (char c : v) r.hits += c ? 1 : 0;
    r.p = static_cast<double>(r.hits) / static_cast<double>(r.trials);
    r.se = std::sqrt(r.p * (1.0 - r.p) / static_cast<double>(r.trials));
    double h = hoeffding_halfwidth(r.trials);
    r.lo = std::max(0.0, r.p - h);
    r.hi = std::min(1.0, r.p + h);
    return r;
}

long trials_of(const ExperimentConfig& cfg, long dflt) {
    long t = cfg.integer("trials", dflt);
    if (t < 1) throw ConfigError("trials must be >= 1");
    return t;
}

// ---- soundness ---------------------------------------------------------------------

ProverStrategy default_prover(const std::string& toy) {
    if (toy == "random-messages") return echo_prover();
    if (toy == "always-accept")
        return stateless_prover([](int, const std::vector<OptMessage>&, RngStream&) -> OptMessage { return Message{}; });
    return blind_guess_prover();
}

void soundness(const ExperimentConfig& cfg, Report& rep) {
    const long trials = trials_of(cfg, 1000);
    const std::string protocol = cfg.str("protocol", "always-accept");
    const int n = static_cast<int>(cfg.integer("n", 1));
    const int m = static_cast<int>(cfg.integer("m", 2));
    const double eps = cfg.real("eps", 0.1);
    if (n < 1) throw ConfigError("n must be >= 1");

    if (protocol == "ce") {
        CEParams p{m, eps, std::max(n, 2), 32};
        p.validate();
        auto hits = parallel_map<char>(trials, cfg.workers, [&](long t) -> char {
            return ce_single_trial(p, "naive", cfg.seed, t, nullptr) ? 1 : 0;
        });
        Rate r = rate(hits);
        double want = ce_naive_success(eps);
        double tol = 3.0 * std::sqrt(want * (1.0 - want) / static_cast<double>(trials));
        rep.metrics.push_back(metric("naive-accept-rate", r.p, r.lo, r.hi, want, "exact naive-prover success 1 - 1.5 eps",
                                     std::abs(r.p - want) <= tol ? "pass" : "fail"));
        rep.metrics.push_back(metric("naive-below-1-eps", r.p, r.lo, r.hi, 1.0 - eps,
                                     "single-copy soundness error at most 1 - eps",
                                     r.p - 3.0 * r.se <= 1.0 - eps ? "pass" : "fail"));
        return;
    }

    const bool rt = protocol.size() > 3 && protocol.substr(protocol.size() - 3) == "/rt";
    const std::string toy = rt ? protocol.substr(0, protocol.size() - 3) : protocol;
    std::vector<double> tp;
    if (toy == "always-accept") tp = {static_cast<double>(m)};
    if (toy == "diluted-guess") tp = {eps, static_cast<double>(m)};
    if (toy == "random-messages") tp = {static_cast<double>(m), static_cast<double>(cfg.integer("k", 3))};
    VerifierSpec base;
    try {
        base = toy_by_name(toy, tp);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    VerifierSpec v = rt ? random_terminating_wrap(base) : base;
    ProverStrategy single = default_prover(toy);
    RepeatedSpec rs = parallel_repeat(v, n);
    MultiProverStrategy multi = independent_copies(single, n);
    const std::string label = "soundness/" + protocol;
    auto hits = parallel_map<char>(trials, cfg.workers, [&](long t) -> char {
        RngStream rng(derive_seed(cfg.seed, label, static_cast<std::uint64_t>(t)));
        if (n == 1) return run_protocol(v, single, rng).accepted ? 1 : 0;
        return run_parallel(rs, multi, rng).accepted ? 1 : 0;
    });
    Rate r = rate(hits);

    std::optional<double> want;
    std::string ref = "no closed form; reported";
    if (toy == "always-accept") {
        want = 1.0;
        ref = "always-accept verifier";
    } else if (!rt && (toy == "coin-guess" || toy == "xor-guess")) {
        want = std::pow(0.5, n);
        ref = "product of independent blind guesses";
    } else if (!rt && toy == "diluted-guess") {
        want = std::pow(1.0 - eps, n);
        ref = "product of independent diluted guesses";
    }
    std::string verdict = "report";
    if (want) {
        double tol = 3.0 * std::sqrt(*want * (1.0 - *want) / static_cast<double>(trials)) + 1e-12;
        verdict = std::abs(r.p - *want) <= tol ? "pass" : "fail";
    }
    rep.metrics.push_back(metric("accept-rate", r.p, r.lo, r.hi, want, ref, verdict));
}

// ---- attack curve ------------------------------------------------------------------

void attack_curve(const ExperimentConfig& cfg, Report& rep) {
    const long trials = trials_of(cfg, 10000);
    const int m = static_cast<int>(cfg.integer("m", 4));
    const double eps = cfg.real("eps", 0.1);
    const auto ns = cfg.reals("n", {20, 40, 60, 80});
    std::vector<double> xs, ys;
    long dec_total = 0;
    for (double nd : ns) {
        const int n = static_cast<int>(nd);
        if (n != nd || n < 2) throw ConfigError("n list entries must be integers >= 2");
        CEParams p{m, eps, n, 32};
        p.validate();
        auto res = parallel_map<std::pair<char, long>>(trials, cfg.workers, [&](long t) {
            long d = 0;
            bool ok = ce_attack_trial(p, cfg.seed, t, &d);
            return std::make_pair(static_cast<char>(ok ? 1 : 0), d);
        });
        std::vector<char> hits;
        for (const auto& [h, d] : res) {
            hits.push_back(h);
            dec_total += d;
        }
        Rate r = rate(hits);
        const double lb = lower_bound_value(eps, n, m);
        const std::string tag = "-n" + std::to_string(n);
        rep.metrics.push_back(metric("success" + tag, r.p, r.lo, r.hi, lb, "(1 - eps)^(14 n / m) lower bound",
                                     r.p - 3.0 * r.se > lb ? "pass" : "fail"));
        const double closed = ce_attack_success(p);
        const double tol = 3.0 * std::sqrt(closed * (1.0 - closed) / static_cast<double>(trials));
        const double gap = std::abs(r.p - closed);
        rep.metrics.push_back(metric("closed-form-gap" + tag, gap, gap, gap, tol,
                                     "exact success of the ideal-oracle attacker, 3 sigma",
                                     gap <= tol ? "pass" : "fail"));
        rep.metrics.push_back(metric("closed-form" + tag, closed, closed, closed, std::nullopt,
                                     "sum over the number of active copies", "report"));
        if (r.hits > 0) {
            xs.push_back(n);
            ys.push_back(std::log(r.p));
        }
    }
    rep.metrics.push_back(metric("dec-calls", static_cast<double>(dec_total), 0, 0, 0.0,
                                 "attacker never decrypts", dec_total == 0 ? "pass" : "fail"));
    const double slope_bound = 14.0 * std::abs(std::log(1.0 - eps)) / m;
    if (xs.size() >= 2 && xs.size() == ns.size()) {
        double mx = 0, my = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            mx += xs[k];
            my += ys[k];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxy += (xs[k] - mx) * (ys[k] - my);
            sxx += (xs[k] - mx) * (xs[k] - mx);
        }
        double slope = sxy / sxx;
        rep.metrics.push_back(metric("log-success-slope", slope, slope, slope, slope_bound,
                                     "|d ln success / dn| <= 14 |ln(1 - eps)| / m",
                                     std::abs(slope) <= slope_bound ? "pass" : "fail"));
    } else if (ns.size() >= 2) {
        rep.metrics.push_back(metric("log-success-slope", std::nan(""), 0, 0, slope_bound,
                                     "|d ln success / dn| <= 14 |ln(1 - eps)| / m; some n had no success", "fail"));
    }
}

// ---- exact skewed instances ---------------------------------------------------------------

struct InstanceResult {
    bool defined = false;
    std::string error;
    SkewedAudit audit;
    std::vector<double> bad_t;
    double undefined_mass = 0.0;
    double gap_max = 0.0;
    double gap_scaled = 0.0;  // gamma_needed * delta_min * n / ln(1/U[W])
};

// Shared by the instance experiments so one seed gives them the same instances.
std::vector<Instance> instances_for(const ExperimentConfig& cfg, long dflt) {
    std::vector<Instance> out;
    if (cfg.has("instance")) {
        out.push_back(load_instance(cfg.str("instance", "")));
        return out;
    }
    long count = cfg.integer("trials", dflt);
    if (count < 1) throw ConfigError("trials must be >= 1");
    static const char* kinds[] = {"termination", "dense", "full"};
    for (long k = 0; k < count; ++k) {
        RngStream rng(derive_seed(cfg.seed, "tiny-instance", static_cast<std::uint64_t>(k)));
        auto ri = random_tiny_instance(rng, kinds[k % 3]);
        out.push_back({ri.base, ri.fam});
    }
    return out;
}

std::vector<InstanceResult> analyse(const ExperimentConfig& cfg, const std::string& label,
                                    const std::vector<Instance>& insts, const std::vector<double>& ts) {
    return parallel_map<InstanceResult>(static_cast<long>(insts.size()), cfg.workers, [&](long k) {
        InstanceResult res;
        try {
            const Instance& in = insts[static_cast<std::size_t>(k)];
            SkewedModel sm(in.base, with_density(in.base, in.fam));
            sm.q_joint();
            res.defined = true;
            RngStream rng(derive_seed(cfg.seed, label + "/events", static_cast<std::uint64_t>(k)));
            if (ts.empty()) {
                res.audit = skewed_audit(sm, rng);
            } else {
                for (double t : ts) {
                    auto b = sm.bad_t_probability(t);
                    res.bad_t.push_back(b.p_t);
                    res.undefined_mass = b.undefined_mass;
                }
                const double lw = std::log(1.0 / sm.u_w());
                std::vector<MatrixEvent> evs{{[W = in.base.W](const CoinMatrix& x) { return !W(x); }, "not W"}};
                const auto& uni = sm.universe();
                for (int e = 0; e < 50; ++e) {
                    auto pick = std::make_shared<std::set<CoinMatrix>>();
                    for (const auto& x : uni)
                        if (rng.bernoulli(0.5)) pick->insert(x);
                    evs.push_back({[pick](const CoinMatrix& x) { return pick->count(x) != 0; }, "random"});
                }
                for (const auto& ev : evs) {
                    auto g = sm.bounding_function_gap(ev);
                    res.gap_max = std::max(res.gap_max, g.gamma_needed);
                    if (lw > 0.0)
                        res.gap_scaled = std::max(res.gap_scaled, g.gamma_needed * sm.family().delta_min * sm.n() / lw);
                }
            }
        } catch (const UnreachableConditioning& e) {
            res.defined = false;
            res.error = e.what();
        }
        return res;
    });
}

void defined_metric(const std::vector<InstanceResult>& rs, Report& rep) {
    long bad = 0;
    for (const auto& r : rs) bad += r.defined ? 0 : 1;
    rep.metrics.push_back(metric("instances-undefined", static_cast<double>(bad), 0, 0, 0.0,
                                 "skewed distribution defined on every reachable history", bad == 0 ? "pass" : "fail"));
}

void skewed_exact(const ExperimentConfig& cfg, Report& rep) {
    auto insts = instances_for(cfg, 30);
    auto rs = analyse(cfg, "skewed-exact", insts, {});
    defined_metric(rs, rep);
    SkewedAudit w;
    w.gamma_excess = w.budget_excess = w.prefix_budget_excess = -kInf;
    for (const auto& r : rs) {
        if (!r.defined) continue;
        const auto& a = r.audit;
        w.qj_uniform = std::max(w.qj_uniform, a.qj_uniform);
        w.omega_prop = std::max(w.omega_prop, a.omega_prop);
        w.omega_first = std::max(w.omega_first, a.omega_first);
        w.gamma_mean = std::max(w.gamma_mean, a.gamma_mean);
        w.gamma_excess = std::max(w.gamma_excess, a.gamma_excess);
        w.u_martingale = std::max(w.u_martingale, a.u_martingale);
        w.v_martingale = std::max(w.v_martingale, a.v_martingale);
        w.omega_identity = std::max(w.omega_identity, a.omega_identity);
        w.budget_excess = std::max(w.budget_excess, a.budget_excess);
        w.prefix_budget_excess = std::max(w.prefix_budget_excess, a.prefix_budget_excess);
        w.degenerate = std::max(w.degenerate, a.degenerate);
    }
    rep.metrics.push_back(residual("q-j-uniform", w.qj_uniform, 1e-9, "Q_J is uniform"));
    rep.metrics.push_back(residual("omega-proportional", w.omega_prop, 1e-9, "Q_{J|X<i} proportional to omega"));
    rep.metrics.push_back(residual("omega-first-round", w.omega_first, 1e-9, "omega = 1 in the first round"));
    rep.metrics.push_back(residual("gamma-mean", w.gamma_mean, 1e-9, "E[gamma_i | X<i] = 0"));
    rep.metrics.push_back(residual("gamma-upper", w.gamma_excess, 1e-12, "gamma_i <= 2 / delta"));
    rep.metrics.push_back(residual("u-martingale", w.u_martingale, 1e-12, "U is a martingale under Idl"));
    rep.metrics.push_back(residual("v-martingale", w.v_martingale, 1e-12, "V is a martingale under Idl"));
    rep.metrics.push_back(residual("omega-identity", w.omega_identity, 1e-9, "omega = R V / U"));
    rep.metrics.push_back(residual("budget", w.budget_excess, 1e-9, "d <= m ln(1/U[W])"));
    if (std::isfinite(w.prefix_budget_excess))
        rep.metrics.push_back(residual("budget-prefix", w.prefix_budget_excess, 1e-9, "prefix families: d <= 2 ln(1/U[W])"));
    rep.metrics.push_back(residual("w-full-degenerate", w.degenerate, 1e-9, "W full: beta = omega = 1, rho = tau = xi = d = 0"));
}

void smoothkl_cert(const ExperimentConfig& cfg, Report& rep) {
    auto insts = instances_for(cfg, 30);
    auto rs = analyse(cfg, "smoothkl-cert", insts, {});
    defined_metric(rs, rep);
    double alpha = 0.0, div = -kInf, small = -kInf;
    long events = 0;
    for (const auto& r : rs) {
        if (!r.defined) continue;
        alpha = std::max(alpha, r.audit.fcut_alpha);
        div = std::max(div, r.audit.fcut_div_excess);
        small = std::max(small, r.audit.small_event_excess);
        events += r.audit.events_checked;
    }
    rep.metrics.push_back(residual("fcut-alpha", alpha, 1e-9, "alpha = 1 - Idl[C_{<=m}]"));
    rep.metrics.push_back(residual("fcut-divergence", div, 1e-9, "div <= sum of per-round conditional divergences"));
    rep.metrics.push_back(residual("small-event", small, 1e-9, "Q[E] <= 2 max{alpha + Idl[E], 4 div}"));
    rep.metrics.push_back(metric("events-checked", static_cast<double>(events), 0, 0, std::nullopt, "count", "report"));
}

void bad_t(const ExperimentConfig& cfg, Report& rep) {
    auto ts = cfg.reals("t", {2, 4, 8, 16});
    for (double t : ts)
        if (!(t > 0.0)) throw ConfigError("t must be positive");
    auto insts = instances_for(cfg, 30);
    auto rs = analyse(cfg, "bad-t", insts, ts);
    long undefined = 0;
    for (const auto& r : rs) undefined += r.defined ? 0 : 1;
    rep.metrics.push_back(metric("instances-undefined", static_cast<double>(undefined), 0, 0, std::nullopt,
                                 "count", "report"));
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double mx = 0.0, mean = 0.0, scaled = 0.0;
        long c = 0;
        for (const auto& r : rs) {
            if (!r.defined) continue;
            mx = std::max(mx, r.bad_t[k]);
            mean += r.bad_t[k];
            scaled = std::max(scaled, r.bad_t[k] * ts[k]);
            ++c;
        }
        if (c) mean /= static_cast<double>(c);
        const std::string tag = "-t" + num_label(ts[k]);
        rep.metrics.push_back(metric("bad-t-max" + tag, mx, mx, mx, std::nullopt, "diagnostic only", "report"));
        rep.metrics.push_back(metric("bad-t-mean" + tag, mean, mean, mean, std::nullopt, "diagnostic only", "report"));
        rep.metrics.push_back(metric("bad-t-times-t" + tag, scaled, scaled, scaled, std::nullopt,
                                     "implied constant, diagnostic only", "report"));
    }
    double gap = 0.0, scaled = 0.0, undef_mass = 0.0;
    for (const auto& r : rs) {
        if (!r.defined) continue;
        gap = std::max(gap, r.gap_max);
        scaled = std::max(scaled, r.gap_scaled);
        undef_mass = std::max(undef_mass, r.undefined_mass);
    }
    rep.metrics.push_back(metric("gap-max", gap, gap, gap, std::nullopt, "diagnostic only", "report"));
    rep.metrics.push_back(metric("gap-implied-constant", scaled, scaled, scaled, std::nullopt,
                                 "gamma_needed delta n / ln(1/U[W]), diagnostic only", "report"));
    rep.metrics.push_back(metric("undefined-mass-max", undef_mass, undef_mass, undef_mass, std::nullopt,
                                 "Idl mass where Q_X vanishes", "report"));
}

// ---- martingale -------------------------------------------------------------------------

void martingale(const ExperimentConfig& cfg, Report& rep) {
    const long trials = trials_of(cfg, 10000);
    const auto lambdas = cfg.reals("lambda", {0.05, 0.1, 0.25});
    for (double l : lambdas)
        if (!(l > 0.0 && l <= 0.25)) throw ConfigError("lambda must lie in (0, 1/4]");
    for (const auto& gen : shipped_generators()) {
        auto stats = parallel_map<PathStats>(trials, cfg.workers,
                                             [&](long t) { return exceedance_trial(gen, cfg.seed, t); });
        auto r = summarize_exceedance(gen.label, lambdas, stats);
        for (const auto& e : r.per_lambda) {
            double bound, allowed;
            std::string ref;
            if (gen.has_zt) {
                bound = prop_bound(r.esum_hat, e.lambda);
                double k = 150.0 / (e.lambda * e.lambda);
                allowed = bound + 3.0 * std::sqrt(e.se_p * e.se_p + k * k * r.se_esum * r.se_esum);
                ref = "150 E[sum min(|Z|,Z^2) + min(|T|,T^2)] / lambda^2";
            } else {
                bound = lemma_bound(r.mu_hat, e.lambda);
                double k = 23.0 / (e.lambda * e.lambda);
                allowed = bound + 3.0 * std::sqrt(e.se_p * e.se_p + k * k * r.se_mu * r.se_mu);
                ref = "23 E[sum min(|R|,R^2)] / lambda^2";
            }
            rep.metrics.push_back(metric(gen.label + "-lambda" + num_label(e.lambda), e.p_hat, e.ci_low, e.ci_high,
                                         bound, ref, e.p_hat <= allowed ? "pass" : "fail"));
        }
        rep.metrics.push_back(metric(gen.label + "-mu", gen.has_zt ? r.esum_hat : r.mu_hat,
                                     (gen.has_zt ? r.esum_hat - 3 * r.se_esum : r.mu_hat - 3 * r.se_mu),
                                     (gen.has_zt ? r.esum_hat + 3 * r.se_esum : r.mu_hat + 3 * r.se_mu), std::nullopt,
                                     "estimated increment budget", "report"));
    }
}

// ---- concentration --------------------------------------------------------------------------

FinitePmf<std::vector<int>> random_tuple_pmf(RngStream& rng, int len, int alphabet) {
    std::vector<std::pair<std::vector<int>, double>> e;
    int total = 1;
    for (int k = 0; k < len; ++k) total *= alphabet;
    for (int code = 0; code < total; ++code) {
        std::vector<int> x(static_cast<std::size_t>(len));
        for (int k = 0, c = code; k < len; ++k, c /= alphabet) x[static_cast<std::size_t>(k)] = c % alphabet;
        // some zero cells so prefixes with no W mass show up
        e.emplace_back(x, rng.bernoulli(0.2) ? 0.0 : rng.uniform());
    }
    e.front().second += 0.01;
    return make_pmf(e);
}

void concentration(const ExperimentConfig& cfg, Report& rep) {
    const long trials = trials_of(cfg, 10000);
    for (const auto& sc : tail_scenarios()) {
        auto hits = parallel_map<char>(trials, cfg.workers, [&](long t) -> char {
            RngStream rng(derive_seed(cfg.seed, sc.label, static_cast<std::uint64_t>(t)));
            return sc.exceeds(rng) ? 1 : 0;
        });
        Rate r = rate(hits);
        rep.metrics.push_back(metric(sc.label, r.p, r.lo, r.hi, sc.bound, "closed-form tail bound",
                                     r.p <= sc.bound + 3.0 * r.se ? "pass" : "fail"));
    }
    const long inst = cfg.integer("instances", 100);
    auto errs = parallel_map<double>(inst, cfg.workers, [&](long k) {
        RngStream rng(derive_seed(cfg.seed, "smooth-sampling", static_cast<std::uint64_t>(k)));
        auto p = random_tuple_pmf(rng, 3, 3);
        // W must stay reachable from every prefix of length < 3 for the
        // identity to hold with equality; give each length-2 prefix one W point.
        std::set<std::vector<int>> w;
        std::set<std::vector<int>> covered;
        for (const auto& [x, q] : p)
            if (q > 0.0 && rng.bernoulli(0.3)) {
                w.insert(x);
                covered.insert({x[0], x[1]});
            }
        for (const auto& [x, q] : p)
            if (q > 0.0 && covered.insert({x[0], x[1]}).second) w.insert(x);
        auto pred = [&w](const std::vector<int>& x) { return w.count(x) != 0; };
        double worst = 0.0;
        for (std::size_t i = 0; i <= 2; ++i) {
            auto s = smooth_sampling_check(p, pred, i);
            worst = std::max(worst, std::abs(s.lhs - s.rhs) / s.rhs);
        }
        return worst;
    });
    double worst = 0.0;
    for (double e : errs) worst = std::max(worst, e);
    rep.metrics.push_back(residual("smooth-sampling-identity", worst, 1e-9, "E[1/P[W|X<i]] = 1/P[W], relative"));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    auto start = std::chrono::steady_clock::now();
    Report rep;
    rep.config = cfg;
    try {
        if (cfg.experiment == "soundness") soundness(cfg, rep);
        else if (cfg.experiment == "attack-curve") attack_curve(cfg, rep);
        else if (cfg.experiment == "skewed-exact") skewed_exact(cfg, rep);
        else if (cfg.experiment == "smoothkl-cert") smoothkl_cert(cfg, rep);
        else if (cfg.experiment == "martingale") martingale(cfg, rep);
        else if (cfg.experiment == "concentration") concentration(cfg, rep);
        else bad_t(cfg, rep);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error("experiment " + cfg.experiment + ": " + e.what());
    }
    rep.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace parrep
