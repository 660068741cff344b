#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "parrep/pmf.hpp"

namespace parrep {

// Nonnegative real or +inf. Plain double; +inf is std::numeric_limits<double>::infinity().
using ExtReal = double;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SupportViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct InternalNamespaceError : std::logic_error {
    using std::logic_error::logic_error;
};

// Natural log; 0 log 0/q = 0; +inf iff P puts mass where Q has none.
template <class T>
ExtReal kl(const FinitePmf<T>& p, const FinitePmf<T>& q) {
    double s = 0.0;
    for (const auto& [x, px] : p) {
        if (px <= 0.0) continue;
        double qx = q.prob(x);
        if (qx <= 0.0) return kInf;
        s += px * std::log(px / qx);
    }
    return s < 0.0 ? 0.0 : s;
}

// E_{x~P_X} KL(P_{Y|x} || Q_{Y|x}).
template <class X, class Y>
ExtReal conditional_kl(const FinitePmf<std::pair<X, Y>>& pxy,
                       const FinitePmf<std::pair<X, Y>>& qxy) {
    std::map<X, double> px, qx;
    for (const auto& [xy, w] : pxy) px[xy.first] += w;
    for (const auto& [xy, w] : qxy) qx[xy.first] += w;
    double s = 0.0;
    for (const auto& [xy, w] : pxy) {
        if (w <= 0.0) continue;
        double pc = w / px[xy.first];
        double qm = qx.count(xy.first) ? qx[xy.first] : 0.0;
        if (qm <= 0.0) return kInf;
        double qc = qxy.prob(xy) / qm;
        if (qc <= 0.0) return kInf;
        s += w * std::log(pc / qc);
    }
    return s < 0.0 ? 0.0 : s;
}

ExtReal bern_kl(double p, double q);

// ---- smooth KL certificates -------------------------------------------------

// Outcomes outside every user universe. Tags nest by prefixing.
struct Sentinel {
    std::vector<std::int64_t> tag;
    auto operator<=>(const Sentinel&) const = default;
};

template <class T>
using Image = std::variant<T, Sentinel>;

template <class T>
using RandomizedFn = std::function<FinitePmf<Image<T>>(const T&)>;

template <class T>
struct CutPair {
    RandomizedFn<T> f_p;
    RandomizedFn<T> f_q;
};

struct SmoothCert {
    double alpha = 0.0;
    ExtReal div = 0.0;
};

template <class T>
CutPair<T> identity_pair() {
    RandomizedFn<T> id = [](const T& x) { return point_mass(Image<T>{x}); };
    return {id, id};
}

template <class T>
FinitePmf<Image<T>> pushforward(const FinitePmf<T>& p, const RandomizedFn<T>& f) {
    std::map<Image<T>, double> acc;
    for (const auto& [x, w] : p) {
        if (w <= 0.0) continue;
        for (const auto& [y, q] : f(x)) acc[y] += w * q;
    }
    std::vector<std::pair<Image<T>, double>> out(acc.begin(), acc.end());
    return FinitePmf<Image<T>>::from_sorted(std::move(out));
}

// Every universe-valued image of f(x) must be x itself.
template <class T>
void check_cut_support(const std::vector<T>& universe, const RandomizedFn<T>& f) {
    for (const auto& x : universe) {
        for (const auto& [y, q] : f(x)) {
            if (q <= 0.0) continue;
            if (const T* v = std::get_if<T>(&y); v && !(*v == x))
                throw SupportViolation("cut function moves mass to a different universe point");
        }
    }
}

template <class T>
std::vector<T> joint_universe(const FinitePmf<T>& p, const FinitePmf<T>& q) {
    std::vector<T> u;
    for (const auto& [x, w] : p) u.push_back(x);
    for (const auto& [x, w] : q) u.push_back(x);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

template <class T>
SmoothCert smooth_cert_eval(const FinitePmf<T>& p, const FinitePmf<T>& q, const CutPair<T>& pair) {
    auto universe = joint_universe(p, q);
    check_cut_support(universe, pair.f_p);
    check_cut_support(universe, pair.f_q);
    SmoothCert c;
    double moved = 0.0;
    for (const auto& [x, w] : p) {
        if (w <= 0.0) continue;
        moved += w * (1.0 - pair.f_p(x).prob(Image<T>{x}));
    }
    c.alpha = std::clamp(moved, 0.0, 1.0);
    c.div = kl(pushforward(p, pair.f_p), pushforward(q, pair.f_q));
    return c;
}

// 2 max{alpha + P[E], 4 div}; the caller checks Q[E] against it.
template <class T, class Pred>
double small_event_bound(const SmoothCert& cert, const FinitePmf<T>& p, const Pred& e) {
    if (std::isinf(cert.div)) return kInf;
    return 2.0 * std::max(cert.alpha + p.mass(e), 4.0 * cert.div);
}

namespace detail {
template <class V>
struct is_image : std::false_type {};
template <class U>
struct is_image<std::variant<U, Sentinel>> : std::true_type {};
}  // namespace detail

inline constexpr std::int64_t kTransportTag = 0x7472;

// Transports a cut pair for (P, Q) to one for (H(P), H(Q)):
// G_T(y) samples x ~ T_{X|H(X)=y}, z ~ F_T(x), outputs y if z = x and a
// prefix-tagged z otherwise.
template <class T, class V>
CutPair<V> smooth_dp_transport(const FinitePmf<T>& p, const FinitePmf<T>& q, const CutPair<T>& pair,
                               const std::function<FinitePmf<V>(const T&)>& h) {
    auto universe = joint_universe(p, q);
    check_cut_support(universe, pair.f_p);
    check_cut_support(universe, pair.f_q);
    if constexpr (detail::is_image<V>::value) {
        for (const auto& x : universe)
            for (const auto& [y, w] : h(x))
                if (w > 0.0 && std::holds_alternative<Sentinel>(y))
                    throw InternalNamespaceError("H maps into the sentinel namespace");
    }

    auto build = [&](const FinitePmf<T>& t, const RandomizedFn<T>& f) {
        // joint table (x, y) with weight T(x) H(x)(y)
        std::map<V, std::vector<std::pair<T, double>>> post;
        std::map<V, double> ymass;
        for (const auto& [x, w] : t) {
            if (w <= 0.0) continue;
            for (const auto& [y, hw] : h(x)) {
                if (hw <= 0.0) continue;
                post[y].emplace_back(x, w * hw);
                ymass[y] += w * hw;
            }
        }
        std::map<V, FinitePmf<Image<V>>> table;
        for (const auto& [y, xs] : post) {
            std::map<Image<V>, double> acc;
            for (const auto& [x, w] : xs) {
                double px = w / ymass[y];
                for (const auto& [z, fz] : f(x)) {
                    if (fz <= 0.0) continue;
                    if (std::holds_alternative<T>(z)) {
                        acc[Image<V>{y}] += px * fz;
                    } else {
                        Sentinel s;
                        s.tag.push_back(kTransportTag);
                        const auto& old = std::get<Sentinel>(z).tag;
                        s.tag.insert(s.tag.end(), old.begin(), old.end());
                        acc[Image<V>{s}] += px * fz;
                    }
                }
            }
            std::vector<std::pair<Image<V>, double>> out(acc.begin(), acc.end());
            table.emplace(y, FinitePmf<Image<V>>::from_sorted(std::move(out)));
        }
        return RandomizedFn<V>([table](const V& y) {
            auto it = table.find(y);
            if (it == table.end()) return point_mass(Image<V>{y});
            return it->second;
        });
    };
    return {build(p, pair.f_p), build(q, pair.f_q)};
}

}  // namespace parrep
