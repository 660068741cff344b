#pragma once

#include <memory>
#include <vector>

#include "parrep/protocol.hpp"
#include "parrep/skewed.hpp"

namespace parrep {

struct AttackConfig {
    int n = 1;           // copies per group
    int groups = 1;      // l; the oracle plays l * n copies
    long k_max = 10000;  // inner-loop cap per round and group
};

struct AttackTrace {
    int j = -1;                    // embedded column among groups * n
    CoinMatrix coins;              // hypothetical coins; column j is left at 0
    std::vector<long> iterations;  // per round, summed over groups
    std::vector<std::vector<long>> group_iterations;  // [round][group]
    bool cap_hit = false;
    int cap_round = -1;
    int real_last_round = -1;  // last round answered for the real verifier
    std::vector<OptMessage> real_msgs;
};

// Single-verifier prover that embeds the real verifier as column j of a
// hypothetical repetition and answers with the oracle's j-th message.
//
// Each round it resamples the other columns' coins from that round on and
// replays the oracle from round 0 until every column (the real one completed
// by the simulator) accepts; then that round's coins are kept. Only
// verifier messages and simulator outputs reach the attack.
class AttackSession : public ProverSession {
public:
    AttackSession(VerifierSpec wrapped, PureMultiProver oracle, SimulatorHandle sim, AttackConfig cfg);

    OptMessage respond(int r, const std::vector<OptMessage>& vmsgs, RngStream& rng) override;

    // After the real verifier has halted: keeps sampling the remaining rounds
    // with column j frozen, so the trace covers every round.
    void finish_ghost(RngStream& rng);

    const AttackTrace& trace() const { return tr_; }

private:
    void start(RngStream& rng);
    // Samples rows >= r for the members of group g other than j.
    void resample_group(int g, int r, RngStream& rng);
    // Replays the oracle; j's view ends after round jh. Returns whether all
    // columns of group g accept, and j's reply in round r.
    bool replay(int g, int r, int jh, OptMessage* j_reply, RngStream& rng);
    OptMessage run_round(int r, int jh, RngStream& rng);

    VerifierSpec v_;
    PureMultiProver oracle_;
    SimulatorHandle sim_;
    AttackConfig cfg_;
    int total_ = 0;
    bool started_ = false;
    AttackTrace tr_;
};

ProverStrategy embed_attack(VerifierSpec wrapped, PureMultiProver oracle, SimulatorHandle sim, AttackConfig cfg);
ProverStrategy grouped_embed_attack(VerifierSpec wrapped, PureMultiProver oracle, SimulatorHandle sim,
                                    AttackConfig cfg);

// One full attack against fresh real coins, ghost rounds included. The
// returned matrix carries the real coins in column j.
struct AttackRun {
    JX jx;
    bool accepted = false;
    AttackTrace trace;
};
AttackRun run_attack_once(const VerifierSpec& wrapped, const PureMultiProver& oracle, const SimulatorHandle& sim,
                          const AttackConfig& cfg, RngStream& rng);

GapReport bounding_function_gap(const BaseModel& base, const DenseFamily& fam, const MatrixEvent& ev);

}  // namespace parrep
