#include "parrep/counterexample.hpp"

#include <cmath>
#include <stdexcept>

namespace parrep {

std::uint64_t IdealPKE::enc(int b, std::uint64_t r) {
    ++enc_calls_;
    // (b, r) -> key ^ packed is injective and mix64 is a bijection
    std::uint64_t c = mix64(key_ ^ ((r << 1) | static_cast<std::uint64_t>(b & 1)));
    table_.emplace(c, std::make_pair(b & 1, r));
    return c;
}

std::optional<std::pair<int, std::uint64_t>> IdealPKE::dec(std::uint64_t c) {
    ++dec_calls_;
    auto it = table_.find(c);
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

void CEParams::validate() const {
    if (m < 2) throw std::invalid_argument("CEParams: m < 2");
    if (!(eps > 0.0 && eps <= 1.0 / 3.0)) throw std::invalid_argument("CEParams: eps outside (0, 1/3]");
    if (n < 2) throw std::invalid_argument("CEParams: n < 2");
    if (kappa < 1 || kappa > 48) throw std::invalid_argument("CEParams: kappa outside [1, 48]");
}

namespace {

using u64 = std::uint64_t;

std::int64_t as_msg(u64 c) { return static_cast<std::int64_t>(c); }
u64 as_id(std::int64_t v) { return static_cast<u64>(v); }

struct Row0 {
    bool active;
    int b;
    u64 r;
};

Row0 read_row0(const CoinSchema& s, Symbol sym) {
    auto f = s.decode(0, sym);
    return {f[0] == 1, static_cast<int>(f[1]), static_cast<u64>(f[2])};
}

u64 fresh_r(const CEParams& p, RngStream& rng) { return rng.below(u64{1} << p.kappa); }

}  // namespace

VerifierSpec ce_verifier(const CEParams& p, std::shared_ptr<IdealPKE> pke) {
    p.validate();
    VerifierSpec v;
    v.name = "counterexample";
    v.rounds = p.m;
    v.schema.rows.assign(static_cast<std::size_t>(p.m), {});
    v.schema.rows[0] = {biased_bit(3.0 * p.eps), uniform_field(2), uniform_field(std::int64_t{1} << p.kappa)};
    const CoinSchema schema = v.schema;
    const int others = p.n - 1;

    v.step = [schema, pke](int r, const Column& coins, const std::vector<Message>&) -> VerifierStep {
        Row0 x = read_row0(schema, coins[0]);
        if (r == 0) {
            if (!x.active) return {Action::Accept, {}};
            return {Action::Send, {as_msg(pke->enc(x.b, x.r))}};
        }
        if (r == 1) return {Action::Send, {x.b, static_cast<std::int64_t>(x.r)}};
        return {Action::Send, {}};
    };
    v.valid_message = [others](int r, const Message& msg) {
        if (r == 0) return static_cast<int>(msg.size()) == others;
        if (r == 1) {
            if (static_cast<int>(msg.size()) != 2 * others) return false;
            for (int i = 0; i < others; ++i)
                if (msg[static_cast<std::size_t>(2 * i)] != 0 && msg[static_cast<std::size_t>(2 * i)] != 1) return false;
            return true;
        }
        return true;
    };
    v.verdict = [schema, pke, others](const Column& coins, const std::vector<Message>& pm) {
        Row0 x = read_row0(schema, coins[0]);
        if (!x.active) return true;
        if (pm.size() < 2) return false;
        const u64 B = pke->enc(x.b, x.r);
        int parity = 0;
        for (int i = 0; i < others; ++i) {
            u64 c = as_id(pm[0][static_cast<std::size_t>(i)]);
            int bi = static_cast<int>(pm[1][static_cast<std::size_t>(2 * i)]);
            u64 ri = static_cast<u64>(pm[1][static_cast<std::size_t>(2 * i + 1)]);
            if (c == B || pke->enc(bi, ri) != c) return false;
            parity ^= bi;
        }
        return parity == x.b;
    };
    return v;
}

namespace {

// Commits in round 0 and opens in round 1. The honest variant decrypts B to
// fix the last bit; the naive one guesses.
class CommitSession : public ProverSession {
public:
    CommitSession(CEParams p, std::shared_ptr<IdealPKE> pke, bool honest)
        : p_(p), pke_(std::move(pke)), honest_(honest) {}

    OptMessage respond(int r, const std::vector<OptMessage>& vm, RngStream& rng) override {
        const int others = p_.n - 1;
        if (r == 0) {
            if (!vm.back()) return std::nullopt;
            int target = -1;
            u64 B = as_id((*vm.back())[0]);
            if (honest_) {
                auto opened = pke_->dec(B);
                if (!opened) return std::nullopt;
                target = opened->first;
            }
            Message out;
            int parity = 0;
            for (int i = 0; i < others; ++i) {
                int b = rng.bernoulli(0.5) ? 1 : 0;
                if (honest_ && i == others - 1) b = parity ^ target;
                parity ^= b;
                u64 rr = fresh_r(p_, rng);
                u64 c = pke_->enc(b, rr);
                while (c == B) c = pke_->enc(b, rr = fresh_r(p_, rng));
                bits_.push_back(b);
                rs_.push_back(rr);
                out.push_back(as_msg(c));
            }
            return out;
        }
        if (r == 1) {
            Message out;
            for (std::size_t i = 0; i < bits_.size(); ++i) {
                out.push_back(bits_[i]);
                out.push_back(static_cast<std::int64_t>(rs_[i]));
            }
            return out;
        }
        return Message{};
    }

private:
    CEParams p_;
    std::shared_ptr<IdealPKE> pke_;
    bool honest_;
    std::vector<int> bits_;
    std::vector<u64> rs_;
};

class AttackerSession : public MultiProverSession {
public:
    AttackerSession(CEParams p, std::shared_ptr<IdealPKE> pke) : p_(p), pke_(std::move(pke)) {}

    MessageTuple respond(int r, const std::vector<MessageTuple>& vm, RngStream& rng) override {
        const int n = p_.n;
        MessageTuple out(static_cast<std::size_t>(n));
        if (r == 0) {
            active_.assign(static_cast<std::size_t>(n), false);
            ct_.assign(static_cast<std::size_t>(n), 0);
            bit_.assign(static_cast<std::size_t>(n), 0);
            rr_.assign(static_cast<std::size_t>(n), 0);
            for (int l = 0; l < n; ++l) {
                const auto& msg = vm[0][static_cast<std::size_t>(l)];
                if (msg) {
                    active_[static_cast<std::size_t>(l)] = true;
                    ct_[static_cast<std::size_t>(l)] = as_id((*msg)[0]);
                } else {
                    // inactive slot: our own commitment
                    bit_[static_cast<std::size_t>(l)] = rng.bernoulli(0.5) ? 1 : 0;
                    rr_[static_cast<std::size_t>(l)] = fresh_r(p_, rng);
                    ct_[static_cast<std::size_t>(l)] =
                        pke_->enc(bit_[static_cast<std::size_t>(l)], rr_[static_cast<std::size_t>(l)]);
                }
            }
            for (int k = 0; k < n; ++k) {
                if (!active_[static_cast<std::size_t>(k)]) continue;
                Message m;
                for (int l = 0; l < n; ++l)
                    if (l != k) m.push_back(as_msg(ct_[static_cast<std::size_t>(l)]));
                out[static_cast<std::size_t>(k)] = std::move(m);
            }
            return out;
        }
        if (r == 1) {
            for (int l = 0; l < n; ++l)
                if (active_[static_cast<std::size_t>(l)] && !vm[1][static_cast<std::size_t>(l)]) aborted_ = true;
            if (aborted_) return out;
            for (int l = 0; l < n; ++l)
                if (active_[static_cast<std::size_t>(l)]) {
                    const Message& rev = *vm[1][static_cast<std::size_t>(l)];
                    bit_[static_cast<std::size_t>(l)] = static_cast<int>(rev[0]);
                    rr_[static_cast<std::size_t>(l)] = static_cast<u64>(rev[1]);
                }
            for (int k = 0; k < n; ++k) {
                if (!vm[1][static_cast<std::size_t>(k)]) continue;
                Message m;
                for (int l = 0; l < n; ++l)
                    if (l != k) {
                        m.push_back(bit_[static_cast<std::size_t>(l)]);
                        m.push_back(static_cast<std::int64_t>(rr_[static_cast<std::size_t>(l)]));
                    }
                out[static_cast<std::size_t>(k)] = std::move(m);
            }
            return out;
        }
        if (aborted_) return out;
        for (int k = 0; k < n; ++k)
            if (vm[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]) out[static_cast<std::size_t>(k)] = Message{};
        return out;
    }

private:
    CEParams p_;
    std::shared_ptr<IdealPKE> pke_;
    std::vector<bool> active_;
    std::vector<u64> ct_;
    std::vector<int> bit_;
    std::vector<u64> rr_;
    bool aborted_ = false;
};

}  // namespace

ProverStrategy ce_honest_prover(const CEParams& p, std::shared_ptr<IdealPKE> pke) {
    return [p, pke]() -> std::unique_ptr<ProverSession> { return std::make_unique<CommitSession>(p, pke, true); };
}

ProverStrategy ce_naive_prover(const CEParams& p, std::shared_ptr<IdealPKE> pke) {
    return [p, pke]() -> std::unique_ptr<ProverSession> { return std::make_unique<CommitSession>(p, pke, false); };
}

MultiProverStrategy ce_attacker(const CEParams& p, std::shared_ptr<IdealPKE> pke) {
    return [p, pke]() -> std::unique_ptr<MultiProverSession> { return std::make_unique<AttackerSession>(p, pke); };
}

double ce_naive_success(double eps) { return 1.0 - 1.5 * eps; }

double ce_attack_success(const CEParams& p) {
    p.validate();
    const double a = 3.0 * p.eps;
    const double stay = 1.0 - 1.0 / p.m;
    // an active copy that survives round 2 still halts later with this probability
    const double tau = 1.0 - std::pow(stay, p.m - 1);
    double total = 0.0;
    for (int L = 0; L <= p.n; ++L) {
        double w = std::exp(std::lgamma(p.n + 1.0) - std::lgamma(L + 1.0) - std::lgamma(p.n - L + 1.0) +
                            (L > 0 ? L * std::log(a) : 0.0) + (p.n - L > 0 ? (p.n - L) * std::log1p(-a) : 0.0));
        double win = 1.0;
        if (L > 0) win = std::pow(1.0 / p.m, L) + std::pow(stay, L) * (0.5 + 0.5 * std::pow(tau, L));
        total += w * win;
    }
    return total;
}

double lower_bound_value(double eps, int n, int m) { return std::pow(1.0 - eps, 14.0 * n / m); }

namespace {
SoundnessEstimate summarize(long trials, long acc) {
    SoundnessEstimate e;
    e.trials = trials;
    e.accepts = acc;
    e.p_hat = static_cast<double>(acc) / static_cast<double>(trials);
    double h = hoeffding_halfwidth(trials);
    e.ci_low = std::max(0.0, e.p_hat - h);
    e.ci_high = std::min(1.0, e.p_hat + h);
    return e;
}
}  // namespace

bool ce_single_trial(const CEParams& p, const std::string& prover, std::uint64_t seed, long t, long* dec_calls) {
    if (prover != "naive" && prover != "honest") throw std::invalid_argument("ce_single_trial: prover is naive or honest");
    RngStream rng(derive_seed(seed, "ce-single-" + prover, static_cast<std::uint64_t>(t)));
    auto pke = std::make_shared<IdealPKE>(rng.engine()());
    VerifierSpec v = ce_verifier(p, pke);
    ProverStrategy s = prover == "naive" ? ce_naive_prover(p, pke) : ce_honest_prover(p, pke);
    bool ok = run_protocol(v, s, rng).accepted;
    if (dec_calls) *dec_calls = pke->dec_calls();
    return ok;
}

bool ce_attack_trial(const CEParams& p, std::uint64_t seed, long t, long* dec_calls) {
    RngStream rng(derive_seed(seed, "ce-parallel-n" + std::to_string(p.n), static_cast<std::uint64_t>(t)));
    auto pke = std::make_shared<IdealPKE>(rng.engine()());
    RepeatedSpec rs = parallel_repeat(random_terminating_wrap(ce_verifier(p, pke)), p.n);
    bool ok = run_parallel(rs, ce_attacker(p, pke), rng).accepted;
    if (dec_calls) *dec_calls = pke->dec_calls();
    return ok;
}

CEEstimate ce_single_copy(const CEParams& p, const std::string& prover, long trials, std::uint64_t seed) {
    long acc = 0, dec = 0;
    for (long t = 0; t < trials; ++t) {
        long d = 0;
        acc += ce_single_trial(p, prover, seed, t, &d) ? 1 : 0;
        dec += d;
    }
    return {summarize(trials, acc), dec};
}

CEEstimate ce_parallel_attack(const CEParams& p, long trials, std::uint64_t seed) {
    long acc = 0, dec = 0;
    for (long t = 0; t < trials; ++t) {
        long d = 0;
        acc += ce_attack_trial(p, seed, t, &d) ? 1 : 0;
        dec += d;
    }
    return {summarize(trials, acc), dec};
}

}  // namespace parrep
