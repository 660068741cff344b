#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parrep/rng.hpp"
#include "parrep/skewed.hpp"

namespace parrep {

using Message = std::vector<std::int64_t>;
using OptMessage = std::optional<Message>;  // nullopt: bottom / halted
using MessageTuple = std::vector<OptMessage>;

// ---- coins -----------------------------------------------------------------

// Explicit weights, or (weights empty) uniform over [0, uniform_size).
struct CoinField {
    std::vector<double> weights;
    std::int64_t uniform_size = 0;

    std::int64_t radix() const { return weights.empty() ? uniform_size : static_cast<std::int64_t>(weights.size()); }
    std::int64_t sample(RngStream& rng) const;
};

CoinField uniform_field(std::int64_t k);
CoinField biased_bit(double p_one);

// One row of fields per coin row. A row symbol packs its fields in mixed
// radix, field 0 least significant. Rows are independent.
struct CoinSchema {
    std::vector<std::vector<CoinField>> rows;

    int row_count() const { return static_cast<int>(rows.size()); }
    Symbol encode(int row, const std::vector<std::int64_t>& fields) const;
    std::vector<std::int64_t> decode(int row, Symbol s) const;
    Symbol sample_row(int row, RngStream& rng) const;
    Column sample(RngStream& rng) const;
    // Exact column law; every field must be small enough to enumerate.
    FinitePmf<Column> pmf() const;
};

// ---- verifiers and provers ----------------------------------------------------

enum class Action { Send, Accept, Reject };

struct VerifierStep {
    Action action = Action::Send;
    Message msg;
};

struct MalformedMessage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stateless description. step(r, ...) may read coin rows <= r only;
// halt_after(r, ...) may read rows <= r + 1.
struct VerifierSpec {
    std::string name;
    int rounds = 0;
    CoinSchema schema;
    std::function<VerifierStep(int r, const Column& coins, const std::vector<Message>& prover_msgs)> step;
    std::function<bool(int r, const Column& coins)> halt_after;  // accept-and-halt; may be empty
    std::function<bool(const Column& coins, const std::vector<Message>& prover_msgs)> verdict;
    std::function<bool(int r, const Message& m)> valid_message;  // may be empty
};

struct Transcript {
    Column coins;
    std::vector<OptMessage> verifier_msgs;
    std::vector<OptMessage> prover_msgs;
    bool accepted = false;
    int halted_at = -1;  // round whose message was replaced by a decision; -1 if all rounds ran
    bool early = false;  // decision came from a halt rather than the final verdict
    std::string diagnostic;
};

// Drives one verifier copy round by round.
class CopyRun {
public:
    CopyRun(const VerifierSpec* v, Column coins);

    // Verifier message for round r, nullopt once halted.
    OptMessage open_round(int r);
    // Prover reply for round r; nullopt counts as malformed.
    void close_round(int r, const OptMessage& reply);
    void finish();

    bool halted() const { return done_; }
    bool accepted() const { return accepted_; }
    const Transcript& transcript() const { return tr_; }
    const std::vector<Message>& replies() const { return replies_; }

private:
    void decide(int r, bool accept, bool early, std::string why = {});

    const VerifierSpec* v_;
    Transcript tr_;
    std::vector<Message> replies_;
    bool done_ = false;
    bool accepted_ = false;
};

class ProverSession {
public:
    virtual ~ProverSession() = default;
    virtual OptMessage respond(int r, const std::vector<OptMessage>& verifier_msgs, RngStream& rng) = 0;
};
using ProverStrategy = std::function<std::unique_ptr<ProverSession>()>;

using StatelessRule = std::function<OptMessage(int r, const std::vector<OptMessage>& vmsgs, RngStream& rng)>;
ProverStrategy stateless_prover(StatelessRule rule);

Transcript run_protocol(const VerifierSpec& v, const ProverStrategy& p, RngStream& rng);
Transcript run_protocol_with_coins(const VerifierSpec& v, ProverSession& p, const Column& coins, RngStream& rng);

// ---- parallel repetition ------------------------------------------------------

class MultiProverSession {
public:
    virtual ~MultiProverSession() = default;
    virtual MessageTuple respond(int r, const std::vector<MessageTuple>& verifier_msgs, RngStream& rng) = 0;
};
using MultiProverStrategy = std::function<std::unique_ptr<MultiProverSession>()>;

// Deterministic, reentrant n-fold prover: the oracle shape the attacks need.
struct PureMultiProver {
    int arity = 0;
    std::function<MessageTuple(int r, const std::vector<MessageTuple>& vmsgs)> respond;
};
MultiProverStrategy as_strategy(PureMultiProver p);

// Copy k runs its own session and sees only its own messages.
MultiProverStrategy independent_copies(ProverStrategy single, int n);

struct RepeatedSpec {
    VerifierSpec base;
    int n = 1;
};

RepeatedSpec parallel_repeat(const VerifierSpec& v, int n);

struct ParallelTranscript {
    CoinMatrix coins;
    std::vector<MessageTuple> verifier_msgs;
    std::vector<MessageTuple> prover_msgs;
    std::vector<bool> copy_accepted;
    bool accepted = false;
};

ParallelTranscript run_parallel(const RepeatedSpec& rs, const MultiProverStrategy& p, RngStream& rng);
ParallelTranscript run_parallel_with_coins(const RepeatedSpec& rs, MultiProverSession& p, const CoinMatrix& coins,
                                           RngStream& rng);
// Deterministic oracle against fixed coins.
bool all_accept(const RepeatedSpec& rs, const PureMultiProver& p, const CoinMatrix& coins);

// ---- random termination ------------------------------------------------------

// m rounds become m + 1 coin rows: row 0 is the base row 0; rows 1..m-1 put a
// termination field (1 = halt after the previous round, probability 1/m) in
// front of the base row; row m is the last termination field alone.
VerifierSpec random_terminating_wrap(const VerifierSpec& v);
inline bool rt_term(Symbol s) { return (s & 1) == 1; }
Column rt_base_coins(const Column& wrapped);
// E_{i,j}: termination after round i, i.e. term field of row i+1; last row full.
DenseFamily rt_family(const VerifierSpec& wrapped, int n);

struct SimOutcome {
    std::vector<OptMessage> further_verifier_msgs;
    bool accepted = false;
};

struct SimulatorHandle {
    double density = 0.0;
    bool prefix = false;
    // Delta for a view that reached the end of `round`.
    std::function<bool(int round, const Column& coins)> in_delta;
    // Completes a view conditioned on Delta at `round`. vmsgs holds messages of
    // rounds <= round, reply is the prover's message for `round`.
    std::function<SimOutcome(const VerifierSpec& v, const std::vector<OptMessage>& vmsgs, int round,
                             const OptMessage& reply, RngStream& rng)>
        complete;
};

SimulatorHandle rt_simulator(const VerifierSpec& wrapped);

// ---- soundness estimation ------------------------------------------------------

struct SoundnessEstimate {
    long trials = 0;
    long accepts = 0;
    double p_hat = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // two-sided Hoeffding, 99.7%
};

double hoeffding_halfwidth(long trials, double confidence = 0.997);

SoundnessEstimate estimate_soundness(const VerifierSpec& v, const ProverStrategy& p, long trials, std::uint64_t seed,
                                     const std::string& label = "soundness");
SoundnessEstimate estimate_soundness(const RepeatedSpec& rs, const MultiProverStrategy& p, long trials,
                                     std::uint64_t seed, const std::string& label = "soundness");

// Skewed-model view of (parallel_repeat(v, n), oracle): U = schema pmf per
// column, W = every copy accepts.
BaseModel protocol_base_model(const RepeatedSpec& rs, const PureMultiProver& oracle);

// ---- toys ----------------------------------------------------------------------------

VerifierSpec toy_always_accept(int m);
// One secret bit; the prover guesses it.
VerifierSpec toy_coin_guess();
// Prover that reads the coin through a handle set by the caller before each run.
ProverStrategy coin_oracle_prover(std::shared_ptr<Column> coins);
ProverStrategy blind_guess_prover();
// With probability 1-2eps accept outright, else a coin guess; m-1 dummy rounds.
VerifierSpec toy_diluted_guess(double eps, int m);
// m = 2: sends a, accepts iff reply = a xor c; round 2 is a dummy.
VerifierSpec toy_xor_guess();
// b_j = a_{(j+1) mod n}, 0 when that neighbour is bottom.
PureMultiProver xor_neighbour_oracle(int n);
// Each round sends a fresh symbol in [0, k); accepts iff the replies sum to an even number.
VerifierSpec toy_random_messages(int m, int k);
ProverStrategy echo_prover();

std::vector<std::string> toy_names();
VerifierSpec toy_by_name(const std::string& name, const std::vector<double>& params);

}  // namespace parrep
