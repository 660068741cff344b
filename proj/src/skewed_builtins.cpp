#include <algorithm>
#include <memory>
#include <numeric>

#include "parrep/skewed.hpp"

namespace parrep {

MatrixEvent w_full() { return full_event<CoinMatrix>("full"); }

MatrixEvent w_cell(int i, int j, Symbol s) {
    return {[=](const CoinMatrix& x) { return x.at(i, j) == s; },
            "cell(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")=" + std::to_string(s)};
}

MatrixEvent w_colsums_equal() {
    return {[](const CoinMatrix& x) {
                Symbol first = 0;
                for (int j = 0; j < x.n; ++j) {
                    Symbol s = 0;
                    for (int i = 0; i < x.m; ++i) s += x.at(i, j);
                    if (j == 0) first = s;
                    else if (s != first) return false;
                }
                return true;
            },
            "colsums-equal"};
}

MatrixEvent w_xor_zero() {
    return {[](const CoinMatrix& x) {
                Symbol acc = 0;
                for (Symbol c : x.cells) acc ^= c;
                return acc == 0;
            },
            "xor-zero"};
}

MatrixEvent w_table(std::set<CoinMatrix> accepted, std::string label) {
    auto tab = std::make_shared<const std::set<CoinMatrix>>(std::move(accepted));
    return {[tab](const CoinMatrix& x) { return tab->count(x) > 0; }, std::move(label)};
}

DenseFamily family_full(int m, int n) {
    DenseFamily f;
    f.m = m;
    f.n = n;
    f.events.assign(static_cast<std::size_t>(m * n), full_event<CoinMatrix>());
    f.prefix = true;
    return f;
}

DenseFamily family_random_termination(int m, int n) {
    DenseFamily f;
    f.m = m;
    f.n = n;
    f.prefix = true;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            if (i + 1 == m) {
                f.events.push_back(full_event<CoinMatrix>());
                continue;
            }
            f.events.push_back({[=](const CoinMatrix& x) { return (x.at(i + 1, j) & 1) == 1; },
                                "term(" + std::to_string(i + 2) + "," + std::to_string(j + 1) + ")"});
        }
    return f;
}

DenseFamily family_bit_grid(int m, int n, const std::vector<int>& rows) {
    if (rows.size() != static_cast<std::size_t>(m * n)) throw std::invalid_argument("bit grid is not m x n");
    DenseFamily f;
    f.m = m;
    f.n = n;
    f.prefix = true;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            int k = rows[static_cast<std::size_t>(i * n + j)];
            if (k == 0) {
                f.events.push_back(full_event<CoinMatrix>());
                continue;
            }
            if (k <= i + 1 || k > m) throw std::invalid_argument("bit grid row must lie strictly after the event's round");
            if (k != i + 2) f.prefix = false;
            f.events.push_back({[=](const CoinMatrix& x) { return (x.at(k - 1, j) & 1) == 1; },
                                "odd(" + std::to_string(k) + "," + std::to_string(j + 1) + ")"});
        }
    return f;
}

DenseFamily family_future_sets(int m, int n, const std::vector<std::set<std::vector<Symbol>>>& sets) {
    if (sets.size() != static_cast<std::size_t>(m * n)) throw std::invalid_argument("future-set grid is not m x n");
    DenseFamily f;
    f.m = m;
    f.n = n;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& s = sets[static_cast<std::size_t>(i * n + j)];
            if (s.empty()) {
                f.events.push_back(full_event<CoinMatrix>());
                continue;
            }
            auto tab = std::make_shared<const std::set<std::vector<Symbol>>>(s);
            f.events.push_back({[=](const CoinMatrix& x) {
                                    std::vector<Symbol> fut;
                                    for (int r = i + 1; r < m; ++r) fut.push_back(x.at(r, j));
                                    return tab->count(fut) > 0;
                                },
                                "future-set"});
        }
    return f;
}

BaseModel make_base(const std::vector<FinitePmf<Column>>& cols, MatrixEvent W) {
    BaseModel b;
    b.n = static_cast<int>(cols.size());
    b.m = b.n ? static_cast<int>(cols[0].entries().front().first.size()) : 0;
    b.columns = cols;
    b.W = std::move(W);
    return b;
}

FinitePmf<Column> independent_bits_column(const std::vector<double>& p) {
    std::vector<FinitePmf<Symbol>> parts;
    for (double q : p) {
        if (q <= 0.0) parts.push_back(point_mass<Symbol>(0));
        else if (q >= 1.0) parts.push_back(point_mass<Symbol>(1));
        else parts.push_back(FinitePmf<Symbol>::from_sorted({{0, 1.0 - q}, {1, q}}));
    }
    return product(parts);
}

namespace {

std::vector<std::vector<Symbol>> all_bit_vectors(int len) {
    std::vector<std::vector<Symbol>> out;
    for (int mask = 0; mask < (1 << len); ++mask) {
        std::vector<Symbol> v(static_cast<std::size_t>(len));
        for (int r = 0; r < len; ++r) v[static_cast<std::size_t>(r)] = (mask >> (len - 1 - r)) & 1;
        out.push_back(v);
    }
    return out;
}

double in_range(RngStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

RandomInstance random_tiny_instance(RngStream& rng, const std::string& kind) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        RandomInstance ri;
        ri.kind = kind;
        int m = 2 + static_cast<int>(rng.below(2));
        int n = 1 + static_cast<int>(rng.below(3));
        std::vector<FinitePmf<Column>> cols;
        DenseFamily fam;
        if (kind == "termination") {
            for (int j = 0; j < n; ++j) {
                std::vector<double> p(static_cast<std::size_t>(m), 1.0 / m);
                p[0] = in_range(rng, 0.2, 0.8);
                cols.push_back(independent_bits_column(p));
            }
            fam = family_random_termination(m, n);
        } else if (kind == "dense") {
            for (int j = 0; j < n; ++j) {
                std::vector<double> p(static_cast<std::size_t>(m));
                for (auto& q : p) q = in_range(rng, 0.2, 0.8);
                cols.push_back(independent_bits_column(p));
            }
            std::vector<std::set<std::vector<Symbol>>> sets(static_cast<std::size_t>(m * n));
            for (int i = 0; i + 1 < m; ++i)
                for (int j = 0; j < n; ++j) {
                    auto fut = all_bit_vectors(m - 1 - i);
                    auto& s = sets[static_cast<std::size_t>(i * n + j)];
                    while (s.empty())
                        for (const auto& v : fut)
                            if (rng.bernoulli(0.5)) s.insert(v);
                    if (s.size() == fut.size()) s.clear();  // same as full
                }
            fam = family_future_sets(m, n, sets);
        } else if (kind == "full") {
            auto vecs = all_bit_vectors(m);
            for (int j = 0; j < n; ++j) {
                std::vector<std::pair<Column, double>> e;
                for (const auto& v : vecs) e.emplace_back(v, in_range(rng, 0.05, 1.0));
                cols.push_back(make_pmf(e));
            }
            fam = family_full(m, n);
        } else {
            throw std::invalid_argument("unknown random instance kind: " + kind);
        }

        BaseModel probe = make_base(cols, w_full());
        auto u = uniform_pmf_of(probe);
        std::set<CoinMatrix> acc;
        double keep = in_range(rng, 0.3, 0.9);
        double mass = 0.0;
        for (const auto& [x, p] : u)
            if (rng.bernoulli(keep)) {
                acc.insert(x);
                mass += p;
            }
        if (mass < 0.1) continue;
        ri.base = make_base(cols, w_table(std::move(acc), "random-table"));
        ri.fam = with_density(ri.base, fam);
        SkewedModel probe_model(ri.base, ri.fam);
        if (!probe_model.q_defined()) continue;
        return ri;
    }
    throw std::runtime_error("random_tiny_instance: no well-defined instance after 1000 attempts");
}

}  // namespace parrep
