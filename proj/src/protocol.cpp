#include "parrep/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace parrep {

// ---- coins -----------------------------------------------------------------

std::int64_t CoinField::sample(RngStream& rng) const {
    if (weights.empty()) return static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(uniform_size)));
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.uniform() * total, acc = 0.0;
    std::int64_t last = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        acc += weights[k];
        last = static_cast<std::int64_t>(k);
        if (u < acc) return last;
    }
    return last;
}

CoinField uniform_field(std::int64_t k) {
    if (k < 1) throw std::invalid_argument("uniform_field: k < 1");
    CoinField f;
    f.uniform_size = k;
    return f;
}

CoinField biased_bit(double p_one) {
    CoinField f;
    f.weights = {1.0 - p_one, p_one};
    return f;
}

Symbol CoinSchema::encode(int row, const std::vector<std::int64_t>& fields) const {
    const auto& fs = rows[static_cast<std::size_t>(row)];
    if (fields.size() != fs.size()) throw std::invalid_argument("encode: field count mismatch");
    Symbol s = 0, scale = 1;
    for (std::size_t k = 0; k < fs.size(); ++k) {
        s += fields[k] * scale;
        scale *= fs[k].radix();
    }
    return s;
}

std::vector<std::int64_t> CoinSchema::decode(int row, Symbol s) const {
    const auto& fs = rows[static_cast<std::size_t>(row)];
    std::vector<std::int64_t> out(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
        out[k] = s % fs[k].radix();
        s /= fs[k].radix();
    }
    return out;
}

Symbol CoinSchema::sample_row(int row, RngStream& rng) const {
    const auto& fs = rows[static_cast<std::size_t>(row)];
    Symbol s = 0, scale = 1;
    for (const auto& f : fs) {
        s += f.sample(rng) * scale;
        scale *= f.radix();
    }
    return s;
}

Column CoinSchema::sample(RngStream& rng) const {
    Column c(rows.size());
    for (int r = 0; r < row_count(); ++r) c[static_cast<std::size_t>(r)] = sample_row(r, rng);
    return c;
}

FinitePmf<Column> CoinSchema::pmf() const {
    std::vector<FinitePmf<Symbol>> per_row;
    for (const auto& fs : rows) {
        std::vector<std::pair<Symbol, double>> cur{{0, 1.0}};
        Symbol scale = 1;
        for (const auto& f : fs) {
            if (f.radix() > 4096) throw std::invalid_argument("CoinSchema::pmf: field too large to enumerate");
            std::vector<std::pair<Symbol, double>> next;
            for (const auto& [s, p] : cur)
                for (std::int64_t v = 0; v < f.radix(); ++v) {
                    double w = f.weights.empty() ? 1.0 / static_cast<double>(f.radix())
                                                 : f.weights[static_cast<std::size_t>(v)];
                    if (!f.weights.empty()) {
                        double tot = 0.0;
                        for (double x : f.weights) tot += x;
                        w /= tot;
                    }
                    if (w > 0.0) next.emplace_back(s + v * scale, p * w);
                }
            cur = std::move(next);
            scale *= f.radix();
        }
        per_row.push_back(make_pmf(cur));
    }
    return product(per_row);
}

// ---- single copy --------------------------------------------------------------

CopyRun::CopyRun(const VerifierSpec* v, Column coins) : v_(v) {
    tr_.coins = std::move(coins);
    tr_.verifier_msgs.assign(static_cast<std::size_t>(v->rounds), std::nullopt);
    tr_.prover_msgs.assign(static_cast<std::size_t>(v->rounds), std::nullopt);
}

void CopyRun::decide(int r, bool accept, bool early, std::string why) {
    done_ = true;
    accepted_ = accept;
    tr_.accepted = accept;
    tr_.halted_at = r;
    tr_.early = early;
    tr_.diagnostic = std::move(why);
}

OptMessage CopyRun::open_round(int r) {
    if (done_) return std::nullopt;
    VerifierStep st = v_->step(r, tr_.coins, replies_);
    if (st.action == Action::Accept) {
        decide(r, true, true);
        return std::nullopt;
    }
    if (st.action == Action::Reject) {
        decide(r, false, true, "verifier rejected");
        return std::nullopt;
    }
    tr_.verifier_msgs[static_cast<std::size_t>(r)] = st.msg;
    return st.msg;
}

void CopyRun::close_round(int r, const OptMessage& reply) {
    if (done_) return;
    if (!reply || (v_->valid_message && !v_->valid_message(r, *reply))) {
        decide(r, false, true, "malformed prover message in round " + std::to_string(r + 1));
        return;
    }
    tr_.prover_msgs[static_cast<std::size_t>(r)] = reply;
    replies_.push_back(*reply);
    if (v_->halt_after && v_->halt_after(r, tr_.coins)) decide(r + 1, true, true);
}

void CopyRun::finish() {
    if (done_) return;
    done_ = true;
    accepted_ = v_->verdict(tr_.coins, replies_);
    tr_.accepted = accepted_;
    tr_.halted_at = -1;
    tr_.early = false;
}

namespace {
class StatelessSession : public ProverSession {
public:
    explicit StatelessSession(const StatelessRule* rule) : rule_(rule) {}
    OptMessage respond(int r, const std::vector<OptMessage>& vm, RngStream& rng) override { return (*rule_)(r, vm, rng); }

private:
    const StatelessRule* rule_;
};
}  // namespace

ProverStrategy stateless_prover(StatelessRule rule) {
    auto shared = std::make_shared<StatelessRule>(std::move(rule));
    return [shared]() -> std::unique_ptr<ProverSession> {
        struct Owning : StatelessSession {
            std::shared_ptr<StatelessRule> keep;
            explicit Owning(std::shared_ptr<StatelessRule> k) : StatelessSession(k.get()), keep(std::move(k)) {}
        };
        return std::make_unique<Owning>(shared);
    };
}

Transcript run_protocol_with_coins(const VerifierSpec& v, ProverSession& p, const Column& coins, RngStream& rng) {
    CopyRun run(&v, coins);
    std::vector<OptMessage> seen;
    for (int r = 0; r < v.rounds && !run.halted(); ++r) {
        OptMessage msg = run.open_round(r);
        if (run.halted()) break;
        seen.push_back(msg);
        run.close_round(r, p.respond(r, seen, rng));
    }
    run.finish();
    return run.transcript();
}

Transcript run_protocol(const VerifierSpec& v, const ProverStrategy& p, RngStream& rng) {
    Column coins = v.schema.sample(rng);
    auto session = p();
    return run_protocol_with_coins(v, *session, coins, rng);
}

// ---- parallel --------------------------------------------------------------------

namespace {

class PureSession : public MultiProverSession {
public:
    explicit PureSession(PureMultiProver p) : p_(std::move(p)) {}
    MessageTuple respond(int r, const std::vector<MessageTuple>& vm, RngStream&) override { return p_.respond(r, vm); }

private:
    PureMultiProver p_;
};

class IndependentSession : public MultiProverSession {
public:
    IndependentSession(const ProverStrategy& single, int n) : seen_(static_cast<std::size_t>(n)) {
        for (int k = 0; k < n; ++k) sessions_.push_back(single());
    }
    MessageTuple respond(int r, const std::vector<MessageTuple>& vm, RngStream& rng) override {
        MessageTuple out(sessions_.size());
        for (std::size_t k = 0; k < sessions_.size(); ++k) {
            const auto& mine = vm.back()[k];
            if (!mine) continue;
            seen_[k].push_back(mine);
            out[k] = sessions_[k]->respond(r, seen_[k], rng);
        }
        return out;
    }

private:
    std::vector<std::unique_ptr<ProverSession>> sessions_;
    std::vector<std::vector<OptMessage>> seen_;
};

// Plays the copies against a responder; returns per-round tuples.
template <class Responder>
void play(std::vector<CopyRun>& copies, int rounds, Responder&& respond, std::vector<MessageTuple>* vlog,
          std::vector<MessageTuple>* plog) {
    std::vector<MessageTuple> hist;
    for (int r = 0; r < rounds; ++r) {
        MessageTuple t(copies.size());
        bool any = false;
        for (std::size_t k = 0; k < copies.size(); ++k) {
            t[k] = copies[k].open_round(r);
            any = any || !copies[k].halted();
        }
        if (!any) break;
        hist.push_back(std::move(t));
        MessageTuple reply = respond(r, hist);
        if (reply.size() != copies.size()) throw MalformedMessage("n-fold prover returned a tuple of the wrong arity");
        for (std::size_t k = 0; k < copies.size(); ++k) copies[k].close_round(r, reply[k]);
        if (plog) plog->push_back(std::move(reply));
    }
    for (auto& c : copies) c.finish();
    if (vlog) *vlog = std::move(hist);
}

}  // namespace

MultiProverStrategy as_strategy(PureMultiProver p) {
    return [p]() -> std::unique_ptr<MultiProverSession> { return std::make_unique<PureSession>(p); };
}

MultiProverStrategy independent_copies(ProverStrategy single, int n) {
    return [single, n]() -> std::unique_ptr<MultiProverSession> { return std::make_unique<IndependentSession>(single, n); };
}

RepeatedSpec parallel_repeat(const VerifierSpec& v, int n) {
    if (n < 1) throw std::invalid_argument("parallel_repeat: n < 1");
    return {v, n};
}

ParallelTranscript run_parallel_with_coins(const RepeatedSpec& rs, MultiProverSession& p, const CoinMatrix& coins,
                                           RngStream& rng) {
    std::vector<CopyRun> copies;
    copies.reserve(static_cast<std::size_t>(rs.n));
    for (int k = 0; k < rs.n; ++k) copies.emplace_back(&rs.base, coins.column(k));
    ParallelTranscript out;
    out.coins = coins;
    play(copies, rs.base.rounds, [&](int r, const std::vector<MessageTuple>& h) { return p.respond(r, h, rng); },
         &out.verifier_msgs, &out.prover_msgs);
    out.accepted = true;
    for (const auto& c : copies) {
        out.copy_accepted.push_back(c.accepted());
        out.accepted = out.accepted && c.accepted();
    }
    return out;
}

ParallelTranscript run_parallel(const RepeatedSpec& rs, const MultiProverStrategy& p, RngStream& rng) {
    std::vector<Column> cols;
    for (int k = 0; k < rs.n; ++k) cols.push_back(rs.base.schema.sample(rng));
    auto session = p();
    return run_parallel_with_coins(rs, *session, from_columns(cols), rng);
}

bool all_accept(const RepeatedSpec& rs, const PureMultiProver& p, const CoinMatrix& coins) {
    std::vector<CopyRun> copies;
    copies.reserve(static_cast<std::size_t>(rs.n));
    for (int k = 0; k < rs.n; ++k) copies.emplace_back(&rs.base, coins.column(k));
    play(copies, rs.base.rounds, [&](int r, const std::vector<MessageTuple>& h) { return p.respond(r, h); }, nullptr,
         nullptr);
    for (const auto& c : copies)
        if (!c.accepted()) return false;
    return true;
}

// ---- random termination ------------------------------------------------------------

Column rt_base_coins(const Column& w) {
    Column base(w.size() - 1);
    base[0] = w[0];
    for (std::size_t r = 1; r < base.size(); ++r) base[r] = w[r] >> 1;
    return base;
}

VerifierSpec random_terminating_wrap(const VerifierSpec& v) {
    const int m = v.rounds;
    if (m < 2) throw std::invalid_argument("random_terminating_wrap: needs m >= 2");
    if (v.schema.row_count() != m) throw std::invalid_argument("random_terminating_wrap: base needs one coin row per round");
    VerifierSpec w;
    w.name = v.name + "/rt";
    w.rounds = m;
    CoinField term = biased_bit(1.0 / m);
    w.schema.rows.push_back(v.schema.rows[0]);
    for (int r = 1; r < m; ++r) {
        std::vector<CoinField> row{term};
        row.insert(row.end(), v.schema.rows[static_cast<std::size_t>(r)].begin(),
                   v.schema.rows[static_cast<std::size_t>(r)].end());
        w.schema.rows.push_back(std::move(row));
    }
    w.schema.rows.push_back({term});

    w.step = [v](int r, const Column& coins, const std::vector<Message>& pm) {
        return v.step(r, rt_base_coins(coins), pm);
    };
    w.halt_after = [v](int r, const Column& coins) {
        if (rt_term(coins[static_cast<std::size_t>(r + 1)])) return true;
        return v.halt_after ? v.halt_after(r, rt_base_coins(coins)) : false;
    };
    w.verdict = [v](const Column& coins, const std::vector<Message>& pm) { return v.verdict(rt_base_coins(coins), pm); };
    w.valid_message = v.valid_message;
    return w;
}

DenseFamily rt_family(const VerifierSpec& wrapped, int n) {
    return family_random_termination(wrapped.schema.row_count(), n);
}

SimulatorHandle rt_simulator(const VerifierSpec& wrapped) {
    SimulatorHandle h;
    h.density = 1.0 / wrapped.rounds;
    h.prefix = true;
    h.in_delta = [](int round, const Column& coins) { return rt_term(coins[static_cast<std::size_t>(round + 1)]); };
    h.complete = [](const VerifierSpec& v, const std::vector<OptMessage>&, int round, const OptMessage& reply,
                    RngStream&) {
        SimOutcome o;
        // the termination coin after `round` is fixed to 1: nothing more is sent
        o.further_verifier_msgs.assign(static_cast<std::size_t>(std::max(0, v.rounds - round - 1)), std::nullopt);
        o.accepted = reply.has_value() && (!v.valid_message || v.valid_message(round, *reply));
        return o;
    };
    return h;
}

// ---- estimation ------------------------------------------------------------------------

double hoeffding_halfwidth(long trials, double confidence) {
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(trials)));
}

namespace {
SoundnessEstimate finish_estimate(long trials, long accepts) {
    SoundnessEstimate e;
    e.trials = trials;
    e.accepts = accepts;
    e.p_hat = static_cast<double>(accepts) / static_cast<double>(trials);
    double h = hoeffding_halfwidth(trials);
    e.ci_low = std::max(0.0, e.p_hat - h);
    e.ci_high = std::min(1.0, e.p_hat + h);
    return e;
}
}  // namespace

SoundnessEstimate estimate_soundness(const VerifierSpec& v, const ProverStrategy& p, long trials, std::uint64_t seed,
                                     const std::string& label) {
    long acc = 0;
    for (long t = 0; t < trials; ++t) {
        RngStream rng(derive_seed(seed, label, static_cast<std::uint64_t>(t)));
        acc += run_protocol(v, p, rng).accepted ? 1 : 0;
    }
    return finish_estimate(trials, acc);
}

SoundnessEstimate estimate_soundness(const RepeatedSpec& rs, const MultiProverStrategy& p, long trials,
                                     std::uint64_t seed, const std::string& label) {
    long acc = 0;
    for (long t = 0; t < trials; ++t) {
        RngStream rng(derive_seed(seed, label, static_cast<std::uint64_t>(t)));
        acc += run_parallel(rs, p, rng).accepted ? 1 : 0;
    }
    return finish_estimate(trials, acc);
}

BaseModel protocol_base_model(const RepeatedSpec& rs, const PureMultiProver& oracle) {
    auto col = rs.base.schema.pmf();
    std::vector<FinitePmf<Column>> cols(static_cast<std::size_t>(rs.n), col);
    auto rs_copy = std::make_shared<RepeatedSpec>(rs);
    MatrixEvent W{[rs_copy, oracle](const CoinMatrix& x) { return all_accept(*rs_copy, oracle, x); },
                  "all copies accept"};
    return make_base(cols, W);
}

}  // namespace parrep
