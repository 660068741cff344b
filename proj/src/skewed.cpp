#include "parrep/skewed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace parrep {

namespace {
constexpr double kTol = 1e-12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

Symbol sample_map(const std::map<Symbol, double>& m, RngStream& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    Symbol last = m.begin()->first;
    for (const auto& [s, p] : m) {
        if (p <= 0.0) continue;
        acc += p;
        last = s;
        if (u < acc) return s;
    }
    return last;
}
}  // namespace

// ---- CoinMatrix -------------------------------------------------------------

Column CoinMatrix::column(int j) const {
    Column c(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) c[static_cast<std::size_t>(i)] = at(i, j);
    return c;
}

void CoinMatrix::set_column(int j, const Column& c) {
    for (int i = 0; i < m; ++i) at(i, j) = c[static_cast<std::size_t>(i)];
}

std::vector<Symbol> CoinMatrix::prefix(int rows) const {
    return {cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(rows * n)};
}

CoinMatrix CoinMatrix::truncated(int rows) const {
    CoinMatrix t(rows, n);
    std::copy_n(cells.begin(), rows * n, t.cells.begin());
    return t;
}

CoinMatrix from_columns(const std::vector<Column>& cols) {
    int n = static_cast<int>(cols.size());
    int m = n ? static_cast<int>(cols[0].size()) : 0;
    CoinMatrix x(m, n);
    for (int j = 0; j < n; ++j) x.set_column(j, cols[static_cast<std::size_t>(j)]);
    return x;
}

std::string to_string(const CoinMatrix& x) {
    std::ostringstream os;
    for (int i = 0; i < x.m; ++i) {
        os << (i ? " | " : "");
        for (int j = 0; j < x.n; ++j) os << (j ? "," : "") << x.at(i, j);
    }
    return os.str();
}

// ---- enumeration helpers ----------------------------------------------------

namespace {

template <class F>
void for_each_matrix(const BaseModel& base, F&& f) {
    std::vector<std::vector<std::pair<Column, double>>> supp(static_cast<std::size_t>(base.n));
    for (int j = 0; j < base.n; ++j)
        for (const auto& [c, p] : base.columns[static_cast<std::size_t>(j)])
            if (p > 0.0) supp[static_cast<std::size_t>(j)].emplace_back(c, p);
    std::vector<std::size_t> idx(static_cast<std::size_t>(base.n), 0);
    CoinMatrix x(base.m, base.n);
    while (true) {
        double p = 1.0;
        for (int j = 0; j < base.n; ++j) {
            const auto& e = supp[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
            x.set_column(j, e.first);
            p *= e.second;
        }
        f(x, p);
        int j = base.n - 1;
        while (j >= 0) {
            auto& k = idx[static_cast<std::size_t>(j)];
            if (++k < supp[static_cast<std::size_t>(j)].size()) break;
            k = 0;
            --j;
        }
        if (j < 0) break;
    }
}

void check_shape(const BaseModel& base, const DenseFamily& fam) {
    if (base.m <= 0 || base.n <= 0) throw std::invalid_argument("base model needs m, n >= 1");
    if (static_cast<int>(base.columns.size()) != base.n) throw std::invalid_argument("column count != n");
    for (const auto& col : base.columns)
        for (const auto& [c, p] : col)
            if (static_cast<int>(c.size()) != base.m) throw std::invalid_argument("column length != m");
    if (fam.m != base.m || fam.n != base.n || static_cast<int>(fam.events.size()) != base.m * base.n)
        throw std::invalid_argument("family grid is not m x n");
}

}  // namespace

DensityReport validate_density(const BaseModel& base, const DenseFamily& fam) {
    check_shape(base, fam);
    const int m = base.m, n = base.n;
    DensityReport rep;
    rep.delta.assign(static_cast<std::size_t>(m * n), 0.0);
    rep.prefix = true;

    // Column locality: the predicate must be constant on matrices sharing column j.
    std::vector<std::map<Column, bool>> seen(static_cast<std::size_t>(m * n));
    for_each_matrix(base, [&](const CoinMatrix& x, double) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                bool v = fam.at(i, j)(x);
                auto& s = seen[static_cast<std::size_t>(i * n + j)];
                auto [it, fresh] = s.emplace(x.column(j), v);
                if (!fresh && it->second != v) {
                    std::ostringstream os;
                    os << "E(" << i + 1 << "," << j + 1 << ") reads a column other than " << j + 1
                       << " (at matrix " << to_string(x) << ")";
                    throw DensityViolation(os.str());
                }
            }
    });

    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto& ev = seen[static_cast<std::size_t>(i * n + j)];
            const auto& col = base.columns[static_cast<std::size_t>(j)];
            // density given each fixing of rows <= i
            std::map<Column, std::pair<double, double>> by_prefix;  // (mass, E-mass)
            std::map<Column, std::optional<bool>> by_next;          // rows <= i+1
            for (const auto& [c, p] : col) {
                if (p <= 0.0) continue;
                bool v = ev.at(c);
                Column pre(c.begin(), c.begin() + i + 1);
                auto& bp = by_prefix[pre];
                bp.first += p;
                if (v) bp.second += p;
                Column nxt(c.begin(), c.begin() + std::min(m, i + 2));
                auto& bn = by_next[nxt];
                if (bn && *bn != v) rep.prefix = false;
                bn = v;
            }
            std::optional<double> d;
            for (const auto& [pre, me] : by_prefix) {
                double dd = me.second / me.first;
                if (d && std::abs(*d - dd) > 1e-9) {
                    std::ostringstream os;
                    os << "E(" << i + 1 << "," << j + 1 << ") has density " << dd << " at fixing (";
                    for (std::size_t k = 0; k < pre.size(); ++k) os << (k ? "," : "") << pre[k];
                    os << ") but " << *d << " elsewhere";
                    throw DensityViolation(os.str());
                }
                if (!d) d = dd;
            }
            if (!d || *d <= 0.0) {
                std::ostringstream os;
                os << "E(" << i + 1 << "," << j + 1 << ") has zero density";
                throw DensityViolation(os.str());
            }
            rep.delta[static_cast<std::size_t>(i * n + j)] = *d;
        }
    }
    rep.delta_min = *std::min_element(rep.delta.begin(), rep.delta.end());
    return rep;
}

DenseFamily with_density(const BaseModel& base, DenseFamily fam) {
    auto rep = validate_density(base, fam);
    if (fam.prefix && !rep.prefix) throw DensityViolation("family claims the prefix property but does not have it");
    fam.prefix = rep.prefix;
    fam.delta = rep.delta;
    fam.delta_min = rep.delta_min;
    return fam;
}

FinitePmf<CoinMatrix> uniform_pmf_of(const BaseModel& base) {
    std::vector<std::pair<CoinMatrix, double>> e;
    for_each_matrix(base, [&](const CoinMatrix& x, double p) { e.emplace_back(x, p); });
    return make_pmf(e);
}

FinitePmf<CoinMatrix> ideal_pmf(const BaseModel& base) {
    return condition(uniform_pmf_of(base), base.W);
}

// ---- RoundLedger --------------------------------------------------------------

double RoundLedger::beta_prime(int j, Symbol s) const {
    const auto& xs = x_sets[static_cast<std::size_t>(j)];
    if (!xs.count(s)) return 0.0;
    return beta[static_cast<std::size_t>(j)].at(s);
}

std::size_t RoundLedger::s_size() const {
    return static_cast<std::size_t>(std::count(in_s.begin(), in_s.end(), true));
}

// ---- SkewedModel --------------------------------------------------------------

SkewedModel::SkewedModel(BaseModel base, DenseFamily fam) : base_(std::move(base)), fam_(std::move(fam)) {
    check_shape(base_, fam_);
    if (fam_.delta.size() != static_cast<std::size_t>(m() * n())) fam_ = with_density(base_, fam_);
    cells_ = static_cast<std::size_t>(m() * n());
    enumerate();
    build_nodes();
    build_ledgers();
    try {
        build_q();
    } catch (const UnreachableConditioning& e) {
        q_error_ = e.what();
    }
    build_event_masses();
}

void SkewedModel::enumerate() {
    std::vector<std::pair<CoinMatrix, double>> all;
    for_each_matrix(base_, [&](const CoinMatrix& x, double p) { all.emplace_back(x, p); });
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    xs_.reserve(all.size());
    for (auto& [x, p] : all) {
        xs_.push_back(x);
        u_.push_back(p);
        bool w = base_.W(x);
        w_.push_back(w ? 1 : 0);
        if (w) uw_ += p;
        for (int i = 0; i < m(); ++i)
            for (int j = 0; j < n(); ++j) e_.push_back(fam_.at(i, j)(x) ? 1 : 0);
    }
    if (!(uw_ > 0.0)) throw ZeroProbabilityEvent("U[W] = 0");

    for (int j = 0; j < n(); ++j) {
        for (const auto& [c, p] : base_.columns[static_cast<std::size_t>(j)]) {
            if (p <= 0.0) continue;
            for (int i = 0; i < m(); ++i) {
                std::vector<Symbol> pre(c.begin(), c.begin() + i);
                col_cond_[{j, pre}][c[static_cast<std::size_t>(i)]] += p;
            }
        }
    }
    for (auto& [key, mp] : col_cond_) {
        double s = 0.0;
        for (auto& [sym, p] : mp) s += p;
        for (auto& [sym, p] : mp) p /= s;
    }
}

std::pair<std::size_t, std::size_t> SkewedModel::block(const CoinMatrix& x, int rows) const {
    const auto len = static_cast<std::ptrdiff_t>(rows * n());
    auto less_pre = [len](const CoinMatrix& a, const CoinMatrix& b) {
        return std::lexicographical_compare(a.cells.begin(), a.cells.begin() + len, b.cells.begin(),
                                            b.cells.begin() + len);
    };
    auto [lo, hi] = std::equal_range(xs_.begin(), xs_.end(), x, less_pre);
    return {static_cast<std::size_t>(lo - xs_.begin()), static_cast<std::size_t>(hi - xs_.begin())};
}

std::size_t SkewedModel::index_of(const CoinMatrix& x) const {
    auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.end() || !(*it == x)) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(it - xs_.begin());
}

const std::map<Symbol, double>& SkewedModel::column_conditional(int j, const CoinMatrix& x, int i) const {
    std::vector<Symbol> pre(static_cast<std::size_t>(i));
    for (int s = 0; s < i; ++s) pre[static_cast<std::size_t>(s)] = x.at(s, j);
    auto it = col_cond_.find({j, pre});
    if (it == col_cond_.end()) throw PrefixOutsideSupport("column prefix outside the support of U");
    return it->second;
}

FinitePmf<CoinMatrix> SkewedModel::ideal() const {
    std::vector<std::pair<CoinMatrix, double>> e;
    for (std::size_t k = 0; k < xs_.size(); ++k)
        if (w_[k]) e.emplace_back(xs_[k], u_[k] / uw_);
    return FinitePmf<CoinMatrix>::from_sorted(std::move(e));
}

FinitePmf<CoinMatrix> SkewedModel::uniform() const {
    std::vector<std::pair<CoinMatrix, double>> e;
    for (std::size_t k = 0; k < xs_.size(); ++k) e.emplace_back(xs_[k], u_[k]);
    return FinitePmf<CoinMatrix>::from_sorted(std::move(e));
}

const SkewedModel::Node* SkewedModel::node(const CoinMatrix& x, int rows) const {
    auto it = nodes_.find(x.prefix(rows));
    return it == nodes_.end() ? nullptr : &it->second;
}

SkewedModel::Node* SkewedModel::node_mut(const CoinMatrix& x, int rows) {
    auto it = nodes_.find(x.prefix(rows));
    return it == nodes_.end() ? nullptr : &it->second;
}

bool SkewedModel::in_ideal_prefix_support(const CoinMatrix& x, int rows) const {
    return node(x, rows) != nullptr;
}

void SkewedModel::build_nodes() {
    const int M = m(), N = n();
    for (std::size_t k = 0; k < xs_.size(); ++k) {
        if (!w_[k]) continue;
        for (int i = 0; i <= M; ++i) {
            auto key = xs_[k].prefix(i);
            auto [it, fresh] = nodes_.try_emplace(std::move(key));
            if (!fresh) continue;
            Node& nd = it->second;
            nd.level = i;
            std::tie(nd.lo, nd.hi) = block(xs_[k], i);
            nd.e_mass.assign(static_cast<std::size_t>(N), 0.0);
            nd.e_prev_mass.assign(static_cast<std::size_t>(N), 0.0);
            nd.sym.resize(static_cast<std::size_t>(N));
            for (std::size_t q = nd.lo; q < nd.hi; ++q) {
                double u = u_[q];
                bool w = w_[q] != 0;
                nd.u_mass += u;
                if (w) nd.w_mass += u;
                for (int j = 0; j < N; ++j) {
                    if (i < M) {
                        bool e = e_of(q, i, j);
                        auto& st = nd.sym[static_cast<std::size_t>(j)][xs_[q].at(i, j)];
                        st.u += u;
                        if (e) st.ue += u;
                        if (w) {
                            st.w += u;
                            if (e) {
                                st.we += u;
                                nd.e_mass[static_cast<std::size_t>(j)] += u;
                            }
                        }
                    }
                    if (i > 0 && w && e_of(q, i - 1, j)) nd.e_prev_mass[static_cast<std::size_t>(j)] += u;
                }
            }
        }
    }
}

void SkewedModel::build_ledgers() {
    const int M = m(), N = n();
    const auto n_sz = static_cast<std::size_t>(N);
    // eprod[j] = prod_s Idl[E|x<=s] / Idl[E|x<s, x_{s,j}] is kept alongside the ledger.
    std::map<std::vector<Symbol>, std::vector<double>> eprod;
    // nodes_ is ordered lexicographically, so every parent precedes its children.
    // Process by level to be explicit.
    for (int i = 0; i <= M; ++i) {
        for (auto& [key, nd] : nodes_) {
            if (nd.level != i) continue;
            RoundLedger& L = nd.led;
            L.round = i;
            const CoinMatrix& x = xs_[nd.lo];
            std::vector<double> ep(n_sz, 1.0);
            if (i == 0) {
                L.omega_prime.assign(n_sz, 1.0);
                L.u_prod.assign(n_sz, 1.0);
                L.v_prod.assign(n_sz, 1.0);
                L.g_prev.assign(n_sz, true);
            } else {
                const Node& par = nodes_.at(x.prefix(i - 1));
                const RoundLedger& P = par.led;
                const auto& pep = eprod.at(x.prefix(i - 1));
                L.omega_prime.resize(n_sz);
                L.u_prod.resize(n_sz);
                L.v_prod.resize(n_sz);
                L.g_prev.resize(n_sz);
                for (std::size_t j = 0; j < n_sz; ++j) {
                    Symbol s = x.at(i - 1, static_cast<int>(j));
                    const SymStats& st = par.sym[j].at(s);
                    double idl_sym = st.w / par.w_mass;
                    double ucond = P.u_cond[j].at(s);
                    L.omega_prime[j] = P.omega_prime[j] * ucond / idl_sym;
                    double e_given_sym = st.we / st.w;              // Idl[E|x<s, x_{s,j}]
                    double e_given_row = nd.e_prev_mass[j] / nd.w_mass;  // Idl[E|x<=s]
                    double td = P.tdelta[j];                        // Idl[E|x<s]
                    ep[j] = pep[j] * (st.we > 0.0 ? e_given_row / e_given_sym : 0.0);
                    L.u_prod[j] = td > 0.0 ? P.u_prod[j] * e_given_sym / td : kNaN;
                    L.v_prod[j] = td > 0.0 ? P.v_prod[j] * e_given_row / td : kNaN;
                    L.g_prev[j] = P.in_s[j] && P.x_sets[j].count(s) > 0;
                }
            }
            double sum_wp = 0.0;
            for (double v : L.omega_prime) sum_wp += v;
            L.omega.resize(n_sz);
            for (std::size_t j = 0; j < n_sz; ++j) L.omega[j] = static_cast<double>(N) * L.omega_prime[j] / sum_wp * ep[j];
            eprod[key] = ep;

            if (i == M) continue;
            L.tdelta.resize(n_sz);
            L.u_cond.resize(n_sz);
            L.beta.resize(n_sz);
            L.x_sets.resize(n_sz);
            L.u_xset.assign(n_sz, 0.0);
            L.in_j.resize(n_sz);
            L.in_s.resize(n_sz);
            L.gamma_denominator = 0.0;
            for (std::size_t j = 0; j < n_sz; ++j) {
                L.tdelta[j] = nd.e_mass[j] / nd.w_mass;
                L.u_cond[j] = column_conditional(static_cast<int>(j), x, i);
                for (const auto& [s, pu] : L.u_cond[j]) {
                    if (pu <= 0.0) continue;
                    double idl_e = 0.0;
                    if (nd.e_mass[j] > 0.0) {
                        auto it = nd.sym[j].find(s);
                        if (it != nd.sym[j].end()) idl_e = it->second.we / nd.e_mass[j];
                    }
                    double b = idl_e > 0.0 ? pu / idl_e : kInf;
                    L.beta[j][s] = b;
                    if (b <= 1.1 + kTol) {
                        L.x_sets[j].insert(s);
                        L.u_xset[j] += pu;
                    }
                }
                double dl = fam_.delta_at(i, static_cast<int>(j));
                L.in_j[j] = L.tdelta[j] >= 0.9 * dl - kTol && std::abs(L.omega[j] - 1.0) <= 0.1 + kTol &&
                            L.u_xset[j] >= 0.9 - kTol;
                L.in_s[j] = L.g_prev[j] && L.in_j[j];
                if (L.in_s[j]) L.gamma_denominator += L.omega[j] * L.u_xset[j];
            }
        }
    }
}

const RoundLedger& SkewedModel::ledger(const CoinMatrix& x, int i) const {
    const Node* nd = node(x, i);
    if (!nd) throw PrefixOutsideSupport("prefix x_{<i} is outside the support of the ideal distribution");
    return nd->led;
}

std::vector<bool> SkewedModel::good_set(const CoinMatrix& x, int i) const {
    if (i < 0) return std::vector<bool>(static_cast<std::size_t>(n()), true);
    const RoundLedger& L = ledger(x, i);
    std::vector<bool> g(static_cast<std::size_t>(n()));
    for (int j = 0; j < n(); ++j) g[static_cast<std::size_t>(j)] = L.in_s[static_cast<std::size_t>(j)] && L.x_sets[static_cast<std::size_t>(j)].count(x.at(i, j)) > 0;
    return g;
}

double SkewedModel::gamma_at(const CoinMatrix& prefix_x, int i, const std::vector<Symbol>& row,
                             const std::vector<bool>& y) const {
    const RoundLedger& L = ledger(prefix_x, i);
    if (L.s_size() == 0 || !(L.gamma_denominator > 0.0)) throw EmptyGoodSet("S_i is empty; gamma undefined");
    double num = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(n()); ++j) {
        if (!L.in_s[j] || !y[j]) continue;
        num += L.omega[j] * L.beta_prime(static_cast<int>(j), row[j]) / L.tdelta[j];
    }
    return num / L.gamma_denominator - 1.0;
}

double SkewedModel::gamma(const CoinMatrix& x, int i) const {
    std::vector<Symbol> row(static_cast<std::size_t>(n()));
    std::vector<bool> y(static_cast<std::size_t>(n()));
    std::size_t k = index_of(x);
    for (int j = 0; j < n(); ++j) {
        row[static_cast<std::size_t>(j)] = x.at(i, j);
        y[static_cast<std::size_t>(j)] = k != static_cast<std::size_t>(-1) ? e_of(k, i, j) : fam_.at(i, j)(x);
    }
    return gamma_at(x, i, row, y);
}

void SkewedModel::build_q() {
    const int M = m(), N = n();
    q_post_.assign(xs_.size(), std::vector<double>(static_cast<std::size_t>(N), 0.0));
    q_x_.assign(xs_.size(), 0.0);
    std::vector<std::pair<JX, double>> entries;
    std::vector<std::vector<double>> qjx(static_cast<std::size_t>(N), std::vector<double>(xs_.size(), 0.0));
    for (int j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < xs_.size(); ++k) {
            const CoinMatrix& x = xs_[k];
            double prob = 1.0 / N;
            for (int i = 0; i < M && prob > 0.0; ++i) {
                double c = column_conditional(j, x, i).at(x.at(i, j));
                const Node* par = node(x, i);
                double den = 0.0;
                if (par) {
                    auto it = par->sym[static_cast<std::size_t>(j)].find(x.at(i, j));
                    if (it != par->sym[static_cast<std::size_t>(j)].end()) den = it->second.we;
                }
                if (!(den > 0.0)) {
                    std::ostringstream os;
                    os << "Idl[E(" << i + 1 << "," << j + 1 << ") | history] = 0 on a reachable history (J=" << j + 1
                       << ", rows<=" << i + 1 << " of " << to_string(x) << ")";
                    throw UnreachableConditioning(os.str());
                }
                const Node* ch = node(x, i + 1);
                double num = ch ? ch->e_prev_mass[static_cast<std::size_t>(j)] : 0.0;
                prob *= c * num / den;
            }
            qjx[static_cast<std::size_t>(j)][k] = prob;
            q_x_[k] += prob;
        }
    }
    for (int j = 0; j < N; ++j)
        for (std::size_t k = 0; k < xs_.size(); ++k) {
            double p = qjx[static_cast<std::size_t>(j)][k];
            if (p > 0.0) entries.push_back({{j, xs_[k]}, p});
            if (q_x_[k] > 0.0) q_post_[k][static_cast<std::size_t>(j)] = p / q_x_[k];
        }
    double total = 0.0;
    for (auto& e : entries) total += e.second;
    for (auto& e : entries) e.second /= total;
    for (auto& v : q_x_) v /= total;
    q_ = FinitePmf<JX>::from_sorted(std::move(entries));

    // B masses per prefix node
    for (const auto& [jx, p] : q_.entries()) {
        const auto& [j, x] = jx;
        for (int i = 0; i < M; ++i) {
            Node* nd = node_mut(x, i);
            if (!nd) throw UnreachableConditioning("Q reaches a prefix outside the ideal support");
            const RoundLedger& L = nd->led;
            auto jj = static_cast<std::size_t>(j);
            if (!L.g_prev[jj]) break;  // nested, later rounds fail too
            nd->qb_den += p;
            if (L.in_s[jj] && L.x_sets[jj].count(x.at(i, j))) nd->qb_num += p;
        }
    }
}

const FinitePmf<JX>& SkewedModel::q_joint() const {
    if (q_error_) throw UnreachableConditioning(*q_error_);
    return q_;
}

FinitePmf<JX> SkewedModel::q_prefix(int rows) const {
    if (rows < 0 || rows > m()) throw BadCoordinate("q_prefix: rows out of range");
    const int N = n();
    std::map<JX, double> acc;
    std::set<std::vector<Symbol>> seen;
    for (const CoinMatrix& x : xs_) {
        if (!seen.insert(x.prefix(rows)).second) continue;
        CoinMatrix t = x.truncated(rows);
        for (int j = 0; j < N; ++j) {
            double prob = 1.0 / N;
            for (int i = 0; i < rows && prob > 0.0; ++i) {
                double c = column_conditional(j, x, i).at(x.at(i, j));
                const Node* par = node(x, i);
                double den = 0.0;
                if (par) {
                    auto it = par->sym[static_cast<std::size_t>(j)].find(x.at(i, j));
                    if (it != par->sym[static_cast<std::size_t>(j)].end()) den = it->second.we;
                }
                if (!(den > 0.0))
                    throw UnreachableConditioning("q_prefix: conditioning event vanishes within the first rows");
                const Node* ch = node(x, i + 1);
                prob *= c * (ch ? ch->e_prev_mass[static_cast<std::size_t>(j)] : 0.0) / den;
            }
            if (prob > 0.0) acc[{j, t}] += prob;
        }
    }
    return make_pmf(std::vector<std::pair<JX, double>>(acc.begin(), acc.end()));
}

FinitePmf<CoinMatrix> SkewedModel::q_x() const {
    return map_pmf(q_joint(), [](const JX& jx) { return jx.second; });
}

void SkewedModel::build_event_masses() {
    const int M = m(), N = n();
    a_.assign(xs_.size(), {});
    // T_i per Idl-supported matrix, then T'_i by block.
    std::vector<std::vector<bool>> t(xs_.size());
    for (std::size_t k = 0; k < xs_.size(); ++k) {
        if (!w_[k]) continue;
        t[k].resize(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i) {
            const RoundLedger& L = ledger(xs_[k], i);
            if (L.s_size() == 0) {
                t[k][static_cast<std::size_t>(i)] = false;
                continue;
            }
            t[k][static_cast<std::size_t>(i)] = std::abs(gamma(xs_[k], i)) <= 0.5 + kTol;
        }
    }
    for (std::size_t k = 0; k < xs_.size(); ++k) {
        if (!w_[k]) continue;
        a_[k].resize(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i) {
            const Node* nd = node(xs_[k], i);
            double tm = 0.0;
            for (std::size_t q = nd->lo; q < nd->hi; ++q)
                if (w_[q] && t[q][static_cast<std::size_t>(i)]) tm += u_[q];
            bool tprime = tm / nd->w_mass >= 1.0 - 1.0 / N - kTol;
            bool g = static_cast<double>(nd->led.s_size()) >= 0.9 * N - kTol;
            a_[k][static_cast<std::size_t>(i)] = g && t[k][static_cast<std::size_t>(i)] && tprime;
        }
    }
    for (auto& [key, nd] : nodes_) {
        if (nd.level >= M) continue;
        int i = nd.level;
        for (std::size_t q = nd.lo; q < nd.hi; ++q) {
            if (!w_[q]) continue;
            bool prev = true;
            for (int s = 0; s < i; ++s) prev = prev && a_[q][static_cast<std::size_t>(s)];
            if (prev) nd.a_den += u_[q];
            if (prev && a_[q][static_cast<std::size_t>(i)]) nd.a_num += u_[q];
        }
    }
}

std::vector<bool> SkewedModel::a_flags(const CoinMatrix& x) const {
    std::size_t k = index_of(x);
    if (k == static_cast<std::size_t>(-1) || !w_[k]) throw PrefixOutsideSupport("matrix outside the ideal support");
    return a_[k];
}

double SkewedModel::q_b_next(const CoinMatrix& x, int i) const {
    q_joint();
    const Node* nd = node(x, i);
    if (!nd || !(nd->qb_den > 0.0)) return 0.0;
    return nd->qb_num / nd->qb_den;
}

EventFlags SkewedModel::event_flags(const CoinMatrix& x, RngStream& rng) const {
    const int M = m(), N = n();
    std::size_t k = index_of(x);
    if (k == static_cast<std::size_t>(-1) || !w_[k]) throw PrefixOutsideSupport("matrix outside the ideal support");
    EventFlags f;
    for (int i = 0; i < M; ++i) {
        const Node* nd = node(x, i);
        const RoundLedger& L = nd->led;
        bool g = static_cast<double>(L.s_size()) >= 0.9 * N - kTol;
        bool t = L.s_size() > 0 && std::abs(gamma(x, i)) <= 0.5 + kTol;
        f.G.push_back(g);
        f.T.push_back(t);
        f.A.push_back(a_[k][static_cast<std::size_t>(i)]);
        f.Tprime.push_back(g && t ? f.A.back() : false);
        // T' is needed on its own; recompute the block mass when A did not settle it.
        if (!(g && t)) {
            double tm = 0.0;
            for (std::size_t q = nd->lo; q < nd->hi; ++q) {
                if (!w_[q]) continue;
                const RoundLedger& Lq = ledger(xs_[q], i);
                if (Lq.s_size() > 0 && std::abs(gamma(xs_[q], i)) <= 0.5 + kTol) tm += u_[q];
            }
            f.Tprime.back() = tm / nd->w_mass >= 1.0 - 1.0 / N - kTol;
        }
        double qb = q_b_next(x, i);
        f.tB.push_back(rng.bernoulli(qb));
        f.C.push_back(f.A.back() && f.tB.back());
    }
    return f;
}

FcutCertificate SkewedModel::fcut_certificate() const {
    const int M = m();
    q_joint();
    FcutCertificate out;
    out.ideal_x = ideal();
    out.q_x = q_x();

    using Key = std::pair<int, std::vector<Symbol>>;
    std::map<Key, double> pimg, qimg;
    double p_all = 0.0;

    // Q-side B masks per universe index: B_{<=i}(j, x).
    auto b_upto = [&](std::size_t k, int i, int j) {
        const CoinMatrix& x = xs_[k];
        for (int s = 0; s <= i; ++s) {
            const RoundLedger& L = ledger(x, s);
            auto jj = static_cast<std::size_t>(j);
            if (!(L.in_s[jj] && L.x_sets[jj].count(x.at(s, j)))) return false;
        }
        return true;
    };

    for (std::size_t k = 0; k < xs_.size(); ++k) {
        const CoinMatrix& x = xs_[k];
        // P side
        if (w_[k]) {
            double px = u_[k] / uw_;
            double stay = 1.0;
            bool a_prev = true;
            for (int i = 0; i < M; ++i) {
                a_prev = a_prev && a_[k][static_cast<std::size_t>(i)];
                double pi = a_prev ? q_b_next(x, i) : 0.0;
                double cut = stay * (1.0 - pi);
                if (cut > 0.0) pimg[{i, x.prefix(i)}] += px * cut;
                stay *= pi;
            }
            if (stay > 0.0) pimg[{M, x.cells}] += px * stay;
            p_all += px * stay;
        }
        // Q side
        if (q_x_[k] > 0.0) {
            double qx = q_x_[k];
            double stay = 1.0;
            for (int i = 0; i < M; ++i) {
                const Node* nd = node(x, i);
                double pa = (nd && nd->a_den > 0.0) ? nd->a_num / nd->a_den : 0.0;
                double bn = 0.0, bd = 0.0;
                for (int j = 0; j < n(); ++j) {
                    double pj = q_post_[k][static_cast<std::size_t>(j)];
                    if (pj <= 0.0) continue;
                    if (i == 0 || b_upto(k, i - 1, j)) bd += pj;
                    if (b_upto(k, i, j)) bn += pj;
                }
                double qi = (bd > 0.0) ? pa * bn / bd : 0.0;
                double cut = stay * (1.0 - qi);
                if (cut > 0.0) qimg[{i, x.prefix(i)}] += qx * cut;
                stay *= qi;
            }
            if (stay > 0.0) qimg[{M, x.cells}] += qx * stay;
        }
    }
    auto to_pmf = [](const std::map<Key, double>& mp) {
        std::vector<std::pair<Key, double>> e(mp.begin(), mp.end());
        return FinitePmf<Key>::from_sorted(std::move(e));
    };
    out.ideal_c_all = p_all;
    out.cert.alpha = std::clamp(1.0 - p_all, 0.0, 1.0);
    out.cert.div = kl(to_pmf(pimg), to_pmf(qimg));

    // Per-round conditional divergences.
    out.per_round.assign(static_cast<std::size_t>(M), 0.0);
    for (int i = 0; i < M; ++i) {
        double wsum = 0.0, acc = 0.0;
        bool infinite = false;
        for (const auto& [key, nd] : nodes_) {
            if (nd.level != i) continue;
            const CoinMatrix& x0 = xs_[nd.lo];
            double prefix_factor = 1.0;  // prod_{s<=i} qB_s(x_{<s})
            for (int s = 0; s <= i; ++s) prefix_factor *= q_b_next(x0, s);
            std::map<std::vector<Symbol>, double> prow, qrow;
            double wc = 0.0;
            for (std::size_t q = nd.lo; q < nd.hi; ++q) {
                if (!w_[q]) continue;
                bool a_all = true;
                for (int s = 0; s <= i; ++s) a_all = a_all && a_[q][static_cast<std::size_t>(s)];
                if (!a_all) continue;
                std::vector<Symbol> row(xs_[q].cells.begin() + i * n(), xs_[q].cells.begin() + (i + 1) * n());
                prow[row] += u_[q];
                wc += u_[q] / uw_ * prefix_factor;
            }
            if (!(wc > 0.0)) continue;
            for (std::size_t q = nd.lo; q < nd.hi; ++q) {
                if (!(q_x_[q] > 0.0)) continue;
                double mass = 0.0;
                for (int j = 0; j < n(); ++j)
                    if (b_upto(q, i, j)) mass += q_post_[q][static_cast<std::size_t>(j)] * q_x_[q];
                if (mass <= 0.0) continue;
                std::vector<Symbol> row(xs_[q].cells.begin() + i * n(), xs_[q].cells.begin() + (i + 1) * n());
                qrow[row] += mass;
            }
            wsum += wc;
            std::vector<std::pair<std::vector<Symbol>, double>> pe(prow.begin(), prow.end());
            std::vector<std::pair<std::vector<Symbol>, double>> qe(qrow.begin(), qrow.end());
            if (qe.empty()) {
                infinite = true;
                continue;
            }
            double d = kl(make_pmf(pe), make_pmf(qe));
            if (std::isinf(d)) infinite = true;
            else acc += wc * d;
        }
        out.per_round[static_cast<std::size_t>(i)] = infinite ? kInf : (wsum > 0.0 ? acc / wsum : 0.0);
    }
    out.per_round_sum = 0.0;
    for (double v : out.per_round) out.per_round_sum += v;
    return out;
}

BudgetReport SkewedModel::divergence_budget() const {
    const int M = m(), N = n();
    BudgetReport r;
    r.d_round.assign(static_cast<std::size_t>(M), 0.0);
    r.ln_inv_uw = std::log(1.0 / uw_);
    for (const auto& [key, nd] : nodes_) {
        int i = nd.level;
        if (i >= M) continue;
        std::map<std::vector<Symbol>, double> pi, pu;
        for (std::size_t q = nd.lo; q < nd.hi; ++q) {
            std::vector<Symbol> key2(xs_[q].cells.begin() + i * N, xs_[q].cells.begin() + (i + 1) * N);
            for (int j = 0; j < N; ++j) key2.push_back(e_of(q, i, j) ? 1 : 0);
            pu[key2] += u_[q] / nd.u_mass;
            if (w_[q]) pi[key2] += u_[q] / nd.w_mass;
        }
        std::vector<std::pair<std::vector<Symbol>, double>> a(pi.begin(), pi.end()), b(pu.begin(), pu.end());
        double d = kl(FinitePmf<std::vector<Symbol>>::from_sorted(a), FinitePmf<std::vector<Symbol>>::from_sorted(b));
        r.d_round[static_cast<std::size_t>(i)] += nd.w_mass / uw_ * d;
    }
    for (double v : r.d_round) r.d += v;
    return r;
}

ExtLedger SkewedModel::ext_ledger(const CoinMatrix& x) const {
    const int M = m(), N = n();
    std::size_t k = index_of(x);
    if (k == static_cast<std::size_t>(-1) || !w_[k]) throw PrefixOutsideSupport("matrix outside the ideal support");
    ExtLedger out;
    auto grid = [&]() { return std::vector<std::vector<double>>(static_cast<std::size_t>(M), std::vector<double>(static_cast<std::size_t>(N))); };
    out.alpha = grid();
    out.rho = grid();
    out.tau = grid();
    out.xi = grid();
    out.U_seq = grid();
    out.V_seq = grid();
    out.R_seq = grid();
    for (int i = 0; i < M; ++i) {
        const Node* nd = node(x, i);
        const Node* ch = node(x, i + 1);
        const RoundLedger& L = nd->led;
        double sum_wp = 0.0;
        for (double v : L.omega_prime) sum_wp += v;
        for (int j = 0; j < N; ++j) {
            auto jj = static_cast<std::size_t>(j);
            auto ii = static_cast<std::size_t>(i);
            Symbol s = x.at(i, j);
            const SymStats& st = nd->sym[jj].at(s);
            double dl = fam_.delta_at(i, j);
            double idl_sym = st.w / nd->w_mass;
            out.alpha[ii][jj] = L.u_cond[jj].at(s) / idl_sym - 1.0;
            out.rho[ii][jj] = L.tdelta[jj] / dl - 1.0;
            out.tau[ii][jj] = ch->e_prev_mass[jj] / ch->w_mass / dl - 1.0;
            out.xi[ii][jj] = st.we / st.w / dl - 1.0;
            double up = i == 0 ? 1.0 : out.U_seq[ii - 1][jj];
            double vp = i == 0 ? 1.0 : out.V_seq[ii - 1][jj];
            out.U_seq[ii][jj] = up * (1.0 + out.xi[ii][jj]) / (1.0 + out.rho[ii][jj]);
            out.V_seq[ii][jj] = vp * (1.0 + out.tau[ii][jj]) / (1.0 + out.rho[ii][jj]);
            out.R_seq[ii][jj] = N * L.omega_prime[jj] / sum_wp;
        }
    }
    return out;
}

BadTReport SkewedModel::bad_t_probability(double t) const {
    if (!(t > 0.0)) throw std::domain_error("bad_t_probability: t must be positive");
    const int M = m(), N = n();
    q_joint();
    BadTReport r;
    double thresh = uw_ / t;
    for (std::size_t k = 0; k < xs_.size(); ++k) {
        if (!w_[k]) continue;
        double px = u_[k] / uw_;
        if (!(q_x_[k] > 0.0)) {
            r.undefined_mass += px;
            r.p_t += px;
            continue;
        }
        const CoinMatrix& x = xs_[k];
        for (int j = 0; j < N; ++j) {
            double pj = q_post_[k][static_cast<std::size_t>(j)];
            if (pj <= 0.0) continue;
            bool bad = false;
            for (int i = 0; i < M && !bad; ++i) {
                const Node* nd = node(x, i);
                const SymStats& st = nd->sym[static_cast<std::size_t>(j)].at(x.at(i, j));
                double cond = st.ue > 0.0 ? st.we / st.ue : 0.0;  // U[W | x<i, x_ij, E_ij]
                if (cond < thresh) bad = true;
            }
            if (bad) r.p_t += px * pj;
        }
    }
    return r;
}

GapReport SkewedModel::bounding_function_gap(const MatrixEvent& ev) const {
    GapReport g;
    auto qx = q_x();
    g.q_prob = qx.mass(ev);
    for (std::size_t k = 0; k < xs_.size(); ++k)
        if (w_[k] && ev(xs_[k])) g.ideal_prob += u_[k] / uw_;
    g.gamma_needed = std::max(0.0, g.q_prob - 2.0 * g.ideal_prob);
    return g;
}

JX SkewedModel::sample(RngStream& rng) const {
    const int M = m(), N = n();
    int J = static_cast<int>(rng.below(static_cast<std::uint64_t>(N)));
    CoinMatrix x(M, N);
    for (int i = 0; i < M; ++i) {
        Symbol s = sample_map(column_conditional(J, x, i), rng);
        x.at(i, J) = s;
        auto [lo, hi] = block(x, i);
        double total = 0.0;
        for (std::size_t q = lo; q < hi; ++q)
            if (w_[q] && e_of(q, i, J) && xs_[q].at(i, J) == s) total += u_[q];
        if (!(total > 0.0)) throw UnreachableConditioning("sampler reached a history with Idl[E | history] = 0");
        double u = rng.uniform() * total, acc = 0.0;
        std::size_t pick = hi;
        for (std::size_t q = lo; q < hi; ++q) {
            if (!(w_[q] && e_of(q, i, J) && xs_[q].at(i, J) == s)) continue;
            acc += u_[q];
            pick = q;
            if (u < acc) break;
        }
        for (int j = 0; j < N; ++j) x.at(i, j) = xs_[pick].at(i, j);
    }
    return {J, x};
}

// ---- rejection sampler --------------------------------------------------------

namespace {
// Samples column rows >= from_row given rows < from_row of c.
Column sample_column_suffix(const FinitePmf<Column>& col, const Column& c, int from_row, RngStream& rng) {
    double total = 0.0;
    for (const auto& [v, p] : col)
        if (std::equal(v.begin(), v.begin() + from_row, c.begin())) total += p;
    if (!(total > 0.0)) throw PrefixOutsideSupport("column prefix outside the support of U");
    double u = rng.uniform() * total, acc = 0.0;
    const Column* pick = nullptr;
    for (const auto& [v, p] : col) {
        if (p <= 0.0 || !std::equal(v.begin(), v.begin() + from_row, c.begin())) continue;
        acc += p;
        pick = &v;
        if (u < acc) break;
    }
    return *pick;
}
}  // namespace

JX skewed_sample_rejection(const BaseModel& base, const DenseFamily& fam, RngStream& rng, long cap,
                           long* iterations) {
    const int M = base.m, N = base.n;
    int J = static_cast<int>(rng.below(static_cast<std::uint64_t>(N)));
    CoinMatrix x(M, N);
    long iters = 0;
    for (int i = 0; i < M; ++i) {
        // X_{i,J} from the column's own conditional, rest of column J fresh.
        Column cj = sample_column_suffix(base.columns[static_cast<std::size_t>(J)], x.column(J), i, rng);
        Symbol sj = cj[static_cast<std::size_t>(i)];
        bool done = false;
        for (long k = 0; k < cap; ++k) {
            ++iters;
            CoinMatrix y = x;
            for (int j = 0; j < N; ++j) {
                if (j == J) {
                    Column c = x.column(J);
                    c[static_cast<std::size_t>(i)] = sj;
                    y.set_column(J, sample_column_suffix(base.columns[static_cast<std::size_t>(J)], c, i + 1, rng));
                } else {
                    y.set_column(j, sample_column_suffix(base.columns[static_cast<std::size_t>(j)], x.column(j), i, rng));
                }
            }
            if (fam.at(i, J)(y) && base.W(y)) {
                for (int j = 0; j < N; ++j) x.at(i, j) = y.at(i, j);
                done = true;
                break;
            }
        }
        if (!done) {
            if (iterations) *iterations = iters;
            throw CapExceeded("rejection sampler exceeded its retry cap");
        }
    }
    if (iterations) *iterations = iters;
    return {J, x};
}

}  // namespace parrep
