#include <algorithm>
#include <cmath>
#include <map>

#include "parrep/skewed.hpp"

namespace parrep {

namespace {
void worst(double& slot, double v) { slot = std::max(slot, v); }
}  // namespace

SkewedAudit skewed_audit(const SkewedModel& sm, RngStream& rng, long random_events) {
    const int M = sm.m(), N = sm.n();
    SkewedAudit a;
    a.gamma_excess = a.budget_excess = a.prefix_budget_excess = a.fcut_div_excess = a.small_event_excess = -kInf;
    const auto& q = sm.q_joint();

    // Q_{J, X<i} per prefix
    std::vector<std::map<std::vector<Symbol>, std::vector<double>>> qpre(static_cast<std::size_t>(M));
    std::vector<double> qj(static_cast<std::size_t>(N), 0.0);
    for (const auto& [jx, p] : q) {
        qj[static_cast<std::size_t>(jx.first)] += p;
        for (int i = 0; i < M; ++i) {
            auto& v = qpre[static_cast<std::size_t>(i)][jx.second.prefix(i)];
            v.resize(static_cast<std::size_t>(N), 0.0);
            v[static_cast<std::size_t>(jx.first)] += p;
        }
    }
    for (double v : qj) worst(a.qj_uniform, std::abs(v - 1.0 / N));

    const bool w_full_inst = sm.u_w() > 1.0 - 1e-12;
    for (int i = 0; i < M; ++i) {
        std::map<std::vector<Symbol>, std::pair<double, double>> gacc;
        std::map<std::vector<Symbol>, std::vector<std::pair<double, double>>> uacc, vacc;
        for (std::size_t k = 0; k < sm.universe().size(); ++k) {
            if (!sm.w_of(k)) continue;
            const CoinMatrix& x = sm.universe()[k];
            const double p = sm.u_of(k) / sm.u_w();
            const auto pre = x.prefix(i);
            const RoundLedger& L = sm.ledger(x, i);

            double tw = 0.0;
            for (double w : L.omega) tw += w;
            auto it = qpre[static_cast<std::size_t>(i)].find(pre);
            if (it != qpre[static_cast<std::size_t>(i)].end() && tw > 0.0) {
                double tq = 0.0;
                for (double v : it->second) tq += v;
                if (tq > 0.0)
                    for (int j = 0; j < N; ++j)
                        worst(a.omega_prop, std::abs(it->second[static_cast<std::size_t>(j)] / tq -
                                                     L.omega[static_cast<std::size_t>(j)] / tw));
            }
            if (i == 0)
                for (double w : L.omega) worst(a.omega_first, std::abs(w - 1.0));

            if (L.s_size() > 0) {
                double g = sm.gamma(x, i);
                worst(a.gamma_excess, g - 2.0 / sm.family().delta_min);
                auto& ga = gacc[pre];
                ga.first += p;
                ga.second += p * g;
            }

            auto e = sm.ext_ledger(x);
            auto& uv = uacc[pre];
            auto& vv = vacc[pre];
            uv.resize(static_cast<std::size_t>(N));
            vv.resize(static_cast<std::size_t>(N));
            for (int j = 0; j < N; ++j) {
                auto jj = static_cast<std::size_t>(j);
                auto ii = static_cast<std::size_t>(i);
                uv[jj].first += p * e.U_seq[ii][jj];
                uv[jj].second += p * (i == 0 ? 1.0 : e.U_seq[ii - 1][jj]);
                vv[jj].first += p * e.V_seq[ii][jj];
                vv[jj].second += p * (i == 0 ? 1.0 : e.V_seq[ii - 1][jj]);
                if (i > 0)
                    worst(a.omega_identity,
                          std::abs(L.omega[jj] - e.R_seq[ii][jj] * e.V_seq[ii - 1][jj] / e.U_seq[ii - 1][jj]));
                if (w_full_inst) {
                    worst(a.degenerate, std::abs(L.omega[jj] - 1.0));
                    for (const auto& [s, b] : L.beta[jj]) worst(a.degenerate, std::abs(b - 1.0));
                    worst(a.degenerate, std::abs(e.rho[ii][jj]));
                    worst(a.degenerate, std::abs(e.tau[ii][jj]));
                    worst(a.degenerate, std::abs(e.xi[ii][jj]));
                }
            }
        }
        for (const auto& [pre, g] : gacc) worst(a.gamma_mean, std::abs(g.second / g.first));
        for (const auto& [pre, v] : uacc)
            for (const auto& [x, y] : v) worst(a.u_martingale, std::abs(x - y));
        for (const auto& [pre, v] : vacc)
            for (const auto& [x, y] : v) worst(a.v_martingale, std::abs(x - y));
    }

    auto b = sm.divergence_budget();
    a.budget_excess = b.d - M * b.ln_inv_uw;
    if (sm.family().prefix) a.prefix_budget_excess = b.d - 2.0 * b.ln_inv_uw;
    if (w_full_inst) worst(a.degenerate, std::abs(b.d));

    auto c = sm.fcut_certificate();
    double c_all = 0.0;
    for (const auto& [x, p] : sm.ideal()) {
        auto fl = sm.a_flags(x);
        double s = 1.0;
        for (int i = 0; i < M; ++i) s *= fl[static_cast<std::size_t>(i)] ? sm.q_b_next(x, i) : 0.0;
        c_all += p * s;
    }
    a.fcut_alpha = std::abs(c.cert.alpha - (1.0 - c_all));
    a.fcut_div_excess = c.cert.div - c.per_round_sum;

    std::vector<CoinMatrix> pts = joint_universe(c.ideal_x, c.q_x);
    auto check = [&](const std::vector<bool>& in) {
        auto ev = [&](const CoinMatrix& x) {
            auto it = std::lower_bound(pts.begin(), pts.end(), x);
            return in[static_cast<std::size_t>(it - pts.begin())];
        };
        double bound = small_event_bound(c.cert, c.ideal_x, ev);
        worst(a.small_event_excess, c.q_x.mass(ev) - bound);
        ++a.events_checked;
    };
    std::vector<bool> in(pts.size());
    if (pts.size() <= 16) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pts.size()); ++mask) {
            for (std::size_t k = 0; k < pts.size(); ++k) in[k] = (mask >> k) & 1;
            check(in);
        }
    } else {
        for (long e = 0; e < random_events; ++e) {
            for (std::size_t k = 0; k < pts.size(); ++k) in[k] = rng.bernoulli(0.5);
            check(in);
        }
    }
    return a;
}

}  // namespace parrep
