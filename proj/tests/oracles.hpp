// Brute-force reference computations used only by tests. Nothing here shares
// code with the library beyond the public data types.
#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "parrep/skewed.hpp"

namespace oracle {

using parrep::CoinMatrix;
using parrep::Symbol;

inline bool same_rows(const CoinMatrix& a, const CoinMatrix& b, int rows) {
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < a.n; ++j)
            if (a.at(i, j) != b.at(i, j)) return false;
    return true;
}

struct World {
    std::vector<CoinMatrix> xs;
    std::vector<double> u;
    std::vector<bool> w;
    double uw = 0.0;
};

inline World enumerate(const parrep::BaseModel& base) {
    World out;
    // odometer over column supports
    std::vector<std::size_t> idx(static_cast<std::size_t>(base.n), 0);
    while (true) {
        CoinMatrix x(base.m, base.n);
        double p = 1.0;
        for (int j = 0; j < base.n; ++j) {
            const auto& e = base.columns[static_cast<std::size_t>(j)].entries()[idx[static_cast<std::size_t>(j)]];
            for (int i = 0; i < base.m; ++i) x.at(i, j) = e.first[static_cast<std::size_t>(i)];
            p *= e.second;
        }
        if (p > 0.0) {
            out.xs.push_back(x);
            out.u.push_back(p);
            bool w = base.W(x);
            out.w.push_back(w);
            if (w) out.uw += p;
        }
        int j = base.n - 1;
        for (; j >= 0; --j) {
            auto& k = idx[static_cast<std::size_t>(j)];
            if (++k < base.columns[static_cast<std::size_t>(j)].size()) break;
            k = 0;
        }
        if (j < 0) break;
    }
    return out;
}

// U(x_ij | x_{<i,j}) straight from the column pmf.
inline double col_cond(const parrep::BaseModel& base, int j, const CoinMatrix& x, int i) {
    double num = 0.0, den = 0.0;
    for (const auto& [c, p] : base.columns[static_cast<std::size_t>(j)]) {
        bool pre = true;
        for (int s = 0; s < i; ++s) pre = pre && c[static_cast<std::size_t>(s)] == x.at(s, j);
        if (!pre) continue;
        den += p;
        if (c[static_cast<std::size_t>(i)] == x.at(i, j)) num += p;
    }
    return den > 0.0 ? num / den : 0.0;
}

// Q(j, x) by the product formula; returns -1 when some needed conditional is undefined.
inline double q_joint(const parrep::BaseModel& base, const parrep::DenseFamily& fam, const World& wd, int j,
                      const CoinMatrix& x) {
    double prob = 1.0 / base.n;
    for (int i = 0; i < base.m && prob > 0.0; ++i) {
        prob *= col_cond(base, j, x, i);
        if (prob == 0.0) break;
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < wd.xs.size(); ++k) {
            const auto& z = wd.xs[k];
            if (!wd.w[k] || !same_rows(z, x, i) || z.at(i, j) != x.at(i, j) || !fam.at(i, j)(z)) continue;
            den += wd.u[k];
            if (same_rows(z, x, i + 1)) num += wd.u[k];
        }
        if (den <= 0.0) return -1.0;
        prob *= num / den;
    }
    return prob;
}

inline double kl_vec(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= 0.0) continue;
        if (q[k] <= 0.0) return INFINITY;
        s += p[k] * std::log(p[k] / q[k]);
    }
    return s;
}

}  // namespace oracle
