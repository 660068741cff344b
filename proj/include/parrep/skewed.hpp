#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "parrep/divergence.hpp"
#include "parrep/pmf.hpp"
#include "parrep/rng.hpp"

namespace parrep {

using Symbol = std::int64_t;
using Column = std::vector<Symbol>;

// m x n matrix of coin symbols, row-major. Rows are rounds, columns are copies.
struct CoinMatrix {
    int m = 0;
    int n = 0;
    std::vector<Symbol> cells;

    CoinMatrix() = default;
    CoinMatrix(int rows, int cols) : m(rows), n(cols), cells(static_cast<std::size_t>(rows * cols), 0) {}

    Symbol at(int i, int j) const { return cells[static_cast<std::size_t>(i * n + j)]; }
    Symbol& at(int i, int j) { return cells[static_cast<std::size_t>(i * n + j)]; }
    Column column(int j) const;
    void set_column(int j, const Column& c);
    // First `rows` rows, flattened.
    std::vector<Symbol> prefix(int rows) const;
    CoinMatrix truncated(int rows) const;

    auto operator<=>(const CoinMatrix&) const = default;
};

CoinMatrix from_columns(const std::vector<Column>& cols);
std::string to_string(const CoinMatrix& x);

using MatrixEvent = EventPredicate<CoinMatrix>;

struct DensityViolation : std::domain_error {
    using std::domain_error::domain_error;
};
struct UnreachableConditioning : std::domain_error {
    using std::domain_error::domain_error;
};
struct PrefixOutsideSupport : std::domain_error {
    using std::domain_error::domain_error;
};
struct EmptyGoodSet : std::domain_error {
    using std::domain_error::domain_error;
};
struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BaseModel {
    int m = 0;
    int n = 0;
    std::vector<FinitePmf<Column>> columns;
    MatrixEvent W;
};

// E_{i,j} stored row-major; each is a predicate on the whole matrix that must
// only read column j.
struct DenseFamily {
    int m = 0;
    int n = 0;
    std::vector<MatrixEvent> events;
    std::vector<double> delta;  // filled by validate_density
    double delta_min = 0.0;
    bool prefix = false;

    const MatrixEvent& at(int i, int j) const { return events[static_cast<std::size_t>(i * n + j)]; }
    double delta_at(int i, int j) const { return delta[static_cast<std::size_t>(i * n + j)]; }
};

struct DensityReport {
    std::vector<double> delta;
    double delta_min = 0.0;
    bool prefix = false;  // holds structurally
};

DensityReport validate_density(const BaseModel& base, const DenseFamily& fam);

// Validates and writes the measured densities into fam. If fam.prefix was
// claimed and does not hold, throws DensityViolation.
DenseFamily with_density(const BaseModel& base, DenseFamily fam);

FinitePmf<CoinMatrix> uniform_pmf_of(const BaseModel& base);
FinitePmf<CoinMatrix> ideal_pmf(const BaseModel& base);

using JX = std::pair<int, CoinMatrix>;

// Per-round slice of the weight ledger; all quantities at x_{<i}.
struct RoundLedger {
    int round = 0;  // 0-based i
    std::vector<double> omega_prime;
    std::vector<double> omega;
    std::vector<double> tdelta;
    std::vector<std::map<Symbol, double>> u_cond;  // U_{X_{i,j}|x_{<i}}
    std::vector<std::map<Symbol, double>> beta;    // +inf where Idl(.|E) vanishes
    std::vector<std::set<Symbol>> x_sets;
    std::vector<double> u_xset;
    std::vector<bool> in_j;
    std::vector<bool> g_prev;  // G_{i-1}
    std::vector<bool> in_s;
    double gamma_denominator = 0.0;
    // Running products over rows < i (the U_{i-1,j}, V_{i-1,j} sequences).
    std::vector<double> u_prod;
    std::vector<double> v_prod;

    double beta_prime(int j, Symbol s) const;
    std::size_t s_size() const;
};

struct EventFlags {
    std::vector<bool> G, T, Tprime, A, B, tB, C;
};

struct ExtLedger {
    // [round][column]
    std::vector<std::vector<double>> alpha, rho, tau, xi;
    std::vector<std::vector<double>> U_seq, V_seq, R_seq;
};

struct FcutCertificate {
    SmoothCert cert;
    double ideal_c_all = 0.0;            // Idl[C_{<=m}] from the event flags
    std::vector<double> per_round;       // D(Idl_{X_i|A<=i} || Q_{X_i|B<=i} | Idl_{X<i|C<=i})
    double per_round_sum = 0.0;
    FinitePmf<CoinMatrix> ideal_x;
    FinitePmf<CoinMatrix> q_x;
};

struct BudgetReport {
    std::vector<double> d_round;
    double d = 0.0;
    double ln_inv_uw = 0.0;
};

struct BadTReport {
    double p_t = 0.0;
    double undefined_mass = 0.0;  // Idl mass where Q_X vanishes; counted as bad
};

struct GapReport {
    double q_prob = 0.0;
    double ideal_prob = 0.0;
    double gamma_needed = 0.0;
};

// Exact analysis of one (U, W, E) instance. Everything is computed at
// construction; afterwards the object is read-only and safe to share.
class SkewedModel {
public:
    SkewedModel(BaseModel base, DenseFamily fam);

    int m() const { return base_.m; }
    int n() const { return base_.n; }
    const BaseModel& base() const { return base_; }
    const DenseFamily& family() const { return fam_; }

    const std::vector<CoinMatrix>& universe() const { return xs_; }
    double u_of(std::size_t k) const { return u_[k]; }
    bool w_of(std::size_t k) const { return w_[k] != 0; }
    bool e_of(std::size_t k, int i, int j) const { return e_[k * cells_ + static_cast<std::size_t>(i * n() + j)] != 0; }
    double u_w() const { return uw_; }

    // Index range of matrices agreeing with x on the first `rows` rows.
    std::pair<std::size_t, std::size_t> block(const CoinMatrix& x, int rows) const;
    std::size_t index_of(const CoinMatrix& x) const;  // npos if absent

    // U_{X_{i,j}|x_{<i,j}}, column-local.
    const std::map<Symbol, double>& column_conditional(int j, const CoinMatrix& x, int i) const;

    FinitePmf<CoinMatrix> ideal() const;
    FinitePmf<CoinMatrix> uniform() const;

    bool q_defined() const { return !q_error_.has_value(); }
    const FinitePmf<JX>& q_joint() const;  // throws UnreachableConditioning
    FinitePmf<CoinMatrix> q_x() const;
    // Marginal of Q on (j, first `rows` rows). Needs only the conditionals of
    // those rows, so it can exist when the full Q does not.
    FinitePmf<JX> q_prefix(int rows) const;

    const RoundLedger& ledger(const CoinMatrix& x, int i) const;  // PrefixOutsideSupport
    bool in_ideal_prefix_support(const CoinMatrix& x, int rows) const;

    // G_i(x_{<=i}) as a mask; i = -1 gives all columns.
    std::vector<bool> good_set(const CoinMatrix& x, int i) const;

    double gamma(const CoinMatrix& x, int i) const;  // uses row i and its y bits
    double gamma_at(const CoinMatrix& prefix_x, int i, const std::vector<Symbol>& row,
                    const std::vector<bool>& y) const;

    // Deterministic part of the event flags (everything except tB).
    std::vector<bool> a_flags(const CoinMatrix& x) const;
    double q_b_next(const CoinMatrix& x, int i) const;  // Q[B_i | x_{<i}, B_{<i}]
    EventFlags event_flags(const CoinMatrix& x, RngStream& rng) const;

    FcutCertificate fcut_certificate() const;
    BudgetReport divergence_budget() const;
    ExtLedger ext_ledger(const CoinMatrix& x) const;
    BadTReport bad_t_probability(double t) const;
    GapReport bounding_function_gap(const MatrixEvent& ev) const;

    // Exact-conditioning sequential sampler.
    JX sample(RngStream& rng) const;

private:
    struct SymStats {
        double u = 0.0, ue = 0.0, w = 0.0, we = 0.0;
    };
    struct Node {
        int level = 0;
        std::size_t lo = 0, hi = 0;
        double u_mass = 0.0;
        double w_mass = 0.0;
        std::vector<double> e_mass;       // W and E_{level,j}
        std::vector<double> e_prev_mass;  // W and E_{level-1,j}
        std::vector<std::map<Symbol, SymStats>> sym;
        RoundLedger led;
        double qb_num = 0.0, qb_den = 0.0;  // Q[B_{<=i}, x_{<i}], Q[B_{<i}, x_{<i}]
        double a_num = 0.0, a_den = 0.0;    // Idl-mass of A_{<=i}, A_{<i} in block
    };

    const Node* node(const CoinMatrix& x, int rows) const;
    Node* node_mut(const CoinMatrix& x, int rows);
    void enumerate();
    void build_nodes();
    void build_ledgers();
    void build_q();
    void build_event_masses();

    BaseModel base_;
    DenseFamily fam_;
    std::size_t cells_ = 0;
    std::vector<CoinMatrix> xs_;
    std::vector<double> u_;
    std::vector<char> w_;
    std::vector<char> e_;
    double uw_ = 0.0;
    std::map<std::vector<Symbol>, Node> nodes_;
    std::map<std::pair<int, std::vector<Symbol>>, std::map<Symbol, double>> col_cond_;
    std::optional<std::string> q_error_;
    FinitePmf<JX> q_;
    std::vector<std::vector<double>> q_post_;  // Q(j | x) per universe index
    std::vector<double> q_x_;                  // Q_X per universe index
    std::vector<std::vector<bool>> a_;         // A flags per universe index (Idl support)
};

// ---- builtins -------------------------------------------------------------

MatrixEvent w_full();
MatrixEvent w_cell(int i, int j, Symbol s);
MatrixEvent w_colsums_equal();
MatrixEvent w_xor_zero();
MatrixEvent w_table(std::set<CoinMatrix> accepted, std::string label = "table");

DenseFamily family_full(int m, int n);
// E_{i,j}: bit 0 of x_{i+1,j} is 1; last row full.
DenseFamily family_random_termination(int m, int n);
// rows[i*n+j] = k (1-based, k > i+1) means E_{i,j} = "x_{k,j} is odd"; 0 means full.
DenseFamily family_bit_grid(int m, int n, const std::vector<int>& rows);
// E_{i,j} = rows strictly after i of column j lie in sets[i*n+j]; empty set means full.
DenseFamily family_future_sets(int m, int n, const std::vector<std::set<std::vector<Symbol>>>& sets);

BaseModel make_base(const std::vector<FinitePmf<Column>>& cols, MatrixEvent W);

// Column with independent rows, row r ~ Bern(p[r]) over {0,1}.
FinitePmf<Column> independent_bits_column(const std::vector<double>& p);

struct RandomInstance {
    BaseModel base;
    DenseFamily fam;
    std::string kind;
};

// Tiny random instance (m, n <= 3, binary symbols, U[W] >= 0.1) whose skewed
// distribution is well defined. kind: "termination", "dense" or "full".
RandomInstance random_tiny_instance(RngStream& rng, const std::string& kind);

// Sequential sampler that never enumerates: resamples continuations until
// W and E_{i,J} hold, at most cap times per row.
JX skewed_sample_rejection(const BaseModel& base, const DenseFamily& fam, RngStream& rng,
                           long cap, long* iterations = nullptr);

}  // namespace parrep

namespace parrep {

// Worst-case residuals of the exact identities on one instance. Every field is
// a nonnegative error or an excess that should be <= 0.
struct SkewedAudit {
    double qj_uniform = 0.0;        // |Q_J(j) - 1/n|
    double omega_prop = 0.0;        // |Q_{J|x<i}(j) - omega_j / sum omega|
    double omega_first = 0.0;       // |omega_{0,j} - 1|
    double gamma_mean = 0.0;        // |E_Idl[gamma_i | x<i]|
    double gamma_excess = 0.0;      // gamma_i - 2 / delta_min
    double u_martingale = 0.0;
    double v_martingale = 0.0;
    double omega_identity = 0.0;    // |omega - R V / U|
    double budget_excess = 0.0;     // d - m ln(1/U[W])
    double prefix_budget_excess = 0.0;  // d - 2 ln(1/U[W]) when the family has the prefix property
    double degenerate = 0.0;        // W full only: |beta-1|, |omega-1|, |rho|, |tau|, |xi|, d
    double fcut_alpha = 0.0;        // |alpha - (1 - Idl[C_{<=m}])|
    double fcut_div_excess = 0.0;   // div - sum of per-round divergences
    double small_event_excess = 0.0;  // Q_X[E] - 2 max{alpha + Idl[E], 4 div}
    long events_checked = 0;
};

// Events for the small-event check: all subsets of the Q/Idl support when it
// has at most 16 points, else `random_events` random subsets.
SkewedAudit skewed_audit(const SkewedModel& sm, RngStream& rng, long random_events = 1000);

}  // namespace parrep
