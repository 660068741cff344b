#include "parrep/attack.hpp"

#include <stdexcept>

namespace parrep {

AttackSession::AttackSession(VerifierSpec wrapped, PureMultiProver oracle, SimulatorHandle sim, AttackConfig cfg)
    : v_(std::move(wrapped)), oracle_(std::move(oracle)), sim_(std::move(sim)), cfg_(cfg) {
    if (cfg_.k_max < 1) throw std::invalid_argument("AttackConfig: k_max < 1");
    if (cfg_.n < 1 || cfg_.groups < 1) throw std::invalid_argument("AttackConfig: n, groups >= 1");
    total_ = cfg_.n * cfg_.groups;
    if (oracle_.arity != total_) throw std::invalid_argument("oracle arity does not match groups * n");
}

void AttackSession::start(RngStream& rng) {
    started_ = true;
    tr_.j = static_cast<int>(rng.below(static_cast<std::uint64_t>(total_)));
    tr_.coins = CoinMatrix(v_.schema.row_count(), total_);
    for (int k = 0; k < total_; ++k)
        if (k != tr_.j)
            for (int s = 0; s < v_.schema.row_count(); ++s) tr_.coins.at(s, k) = v_.schema.sample_row(s, rng);
    tr_.group_iterations.assign(static_cast<std::size_t>(v_.rounds), std::vector<long>(static_cast<std::size_t>(cfg_.groups), 0));
    tr_.iterations.assign(static_cast<std::size_t>(v_.rounds), 0);
}

void AttackSession::resample_group(int g, int r, RngStream& rng) {
    for (int k = g * cfg_.n; k < (g + 1) * cfg_.n; ++k) {
        if (k == tr_.j) continue;
        for (int s = r; s < v_.schema.row_count(); ++s) tr_.coins.at(s, k) = v_.schema.sample_row(s, rng);
    }
}

bool AttackSession::replay(int g, int r, int jh, OptMessage* j_reply, RngStream& rng) {
    const int j = tr_.j;
    std::vector<CopyRun> copies;
    copies.reserve(static_cast<std::size_t>(total_));
    for (int k = 0; k < total_; ++k) copies.emplace_back(&v_, tr_.coins.column(k));
    bool j_ok = jh < 0;  // a view that never started has nothing to lose
    std::vector<MessageTuple> hist;
    const int lo = g * cfg_.n, hi = (g + 1) * cfg_.n;
    auto group_failed = [&]() {
        for (int k = lo; k < hi; ++k)
            if (k != j && copies[static_cast<std::size_t>(k)].halted() && !copies[static_cast<std::size_t>(k)].accepted())
                return true;
        return false;
    };

    for (int s = 0; s < v_.rounds; ++s) {
        MessageTuple t(static_cast<std::size_t>(total_));
        bool live = s <= jh;
        for (int k = 0; k < total_; ++k) {
            if (k == j) continue;
            t[static_cast<std::size_t>(k)] = copies[static_cast<std::size_t>(k)].open_round(s);
            live = live || !copies[static_cast<std::size_t>(k)].halted();
        }
        if (!live) break;
        if (s <= jh) t[static_cast<std::size_t>(j)] = tr_.real_msgs[static_cast<std::size_t>(s)];
        hist.push_back(std::move(t));
        MessageTuple reply = oracle_.respond(s, hist);
        if (reply.size() != static_cast<std::size_t>(total_)) throw MalformedMessage("oracle returned a tuple of the wrong arity");
        for (int k = 0; k < total_; ++k)
            if (k != j) copies[static_cast<std::size_t>(k)].close_round(s, reply[static_cast<std::size_t>(k)]);
        if (s <= jh) {
            const OptMessage& jr = reply[static_cast<std::size_t>(j)];
            if (s == r && j_reply) *j_reply = jr;
            if (s < jh) {
                if (!jr || (v_.valid_message && !v_.valid_message(s, *jr))) return false;
            } else {
                std::vector<OptMessage> view(tr_.real_msgs.begin(), tr_.real_msgs.begin() + jh + 1);
                j_ok = sim_.complete(v_, view, jh, jr, rng).accepted;
                if (!j_ok && j >= lo && j < hi) return false;
            }
        }
        if (group_failed()) return false;
    }
    for (int k = 0; k < total_; ++k)
        if (k != j) copies[static_cast<std::size_t>(k)].finish();
    for (int k = lo; k < hi; ++k) {
        if (k == j) {
            if (!j_ok) return false;
        } else if (!copies[static_cast<std::size_t>(k)].accepted()) {
            return false;
        }
    }
    return true;
}

OptMessage AttackSession::run_round(int r, int jh, RngStream& rng) {
    const int jg = tr_.j / cfg_.n;
    OptMessage out;
    // embedded group last, so j's reply comes from a replay with every row r fixed
    std::vector<int> order;
    for (int g = 0; g < cfg_.groups; ++g)
        if (g != jg) order.push_back(g);
    order.push_back(jg);
    for (int g : order) {
        long& count = tr_.group_iterations[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)];
        for (;;) {
            if (count >= cfg_.k_max) {
                tr_.cap_hit = true;
                tr_.cap_round = r;
                return std::nullopt;
            }
            resample_group(g, r, rng);
            ++count;
            ++tr_.iterations[static_cast<std::size_t>(r)];
            OptMessage rep;
            if (replay(g, r, jh, &rep, rng)) {
                if (g == jg) out = std::move(rep);
                break;
            }
        }
    }
    return out;
}

OptMessage AttackSession::respond(int r, const std::vector<OptMessage>& vmsgs, RngStream& rng) {
    if (!started_) start(rng);
    tr_.real_msgs = vmsgs;
    tr_.real_last_round = r;
    if (tr_.cap_hit) return std::nullopt;
    return run_round(r, r, rng);
}

void AttackSession::finish_ghost(RngStream& rng) {
    if (!started_) start(rng);
    for (int r = tr_.real_last_round + 1; r < v_.rounds && !tr_.cap_hit; ++r) run_round(r, tr_.real_last_round, rng);
}

ProverStrategy embed_attack(VerifierSpec wrapped, PureMultiProver oracle, SimulatorHandle sim, AttackConfig cfg) {
    cfg.groups = 1;
    return grouped_embed_attack(std::move(wrapped), std::move(oracle), std::move(sim), cfg);
}

ProverStrategy grouped_embed_attack(VerifierSpec wrapped, PureMultiProver oracle, SimulatorHandle sim,
                                    AttackConfig cfg) {
    return [=]() -> std::unique_ptr<ProverSession> { return std::make_unique<AttackSession>(wrapped, oracle, sim, cfg); };
}

AttackRun run_attack_once(const VerifierSpec& wrapped, const PureMultiProver& oracle, const SimulatorHandle& sim,
                          const AttackConfig& cfg, RngStream& rng) {
    AttackSession session(wrapped, oracle, sim, cfg);
    Column real = wrapped.schema.sample(rng);
    Transcript t = run_protocol_with_coins(wrapped, session, real, rng);
    session.finish_ghost(rng);
    AttackRun out;
    out.accepted = t.accepted;
    out.trace = session.trace();
    CoinMatrix x = out.trace.coins;
    x.set_column(out.trace.j, real);
    out.jx = {out.trace.j, std::move(x)};
    return out;
}

GapReport bounding_function_gap(const BaseModel& base, const DenseFamily& fam, const MatrixEvent& ev) {
    return SkewedModel(base, with_density(base, fam)).bounding_function_gap(ev);
}

}  // namespace parrep
