#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "parrep/rng.hpp"

namespace parrep {

struct InvalidPmf : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ZeroProbabilityEvent : std::domain_error {
    using std::domain_error::domain_error;
};

struct BadCoordinate : std::out_of_range {
    using std::out_of_range::out_of_range;
};

template <class T>
struct EventPredicate {
    std::function<bool(const T&)> pred;
    std::string label;

    bool operator()(const T& x) const { return pred(x); }
};

template <class T>
EventPredicate<T> full_event(std::string label = "full") {
    return {[](const T&) { return true; }, std::move(label)};
}

// Exact pmf over a finite set of ordered outcomes. Entries are kept sorted by
// outcome, which fixes iteration order for reproducible reports.
template <class T>
class FinitePmf {
public:
    using Entry = std::pair<T, double>;

    FinitePmf() = default;

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    double prob(const T& x) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                                   [](const Entry& e, const T& v) { return e.first < v; });
        if (it == entries_.end() || x < it->first) return 0.0;
        return it->second;
    }

    template <class Pred>
    double mass(const Pred& e) const {
        double s = 0.0;
        for (const auto& [x, p] : entries_)
            if (e(x)) s += p;
        return s;
    }

    std::vector<T> support() const {
        std::vector<T> out;
        for (const auto& [x, p] : entries_)
            if (p > 0.0) out.push_back(x);
        return out;
    }

    // Builds from entries that are already merged, sorted and normalized.
    static FinitePmf from_sorted(std::vector<Entry> entries) {
        FinitePmf out;
        out.entries_ = std::move(entries);
        return out;
    }

private:
    std::vector<Entry> entries_;
};

template <class T>
FinitePmf<T> make_pmf(const std::vector<std::pair<T, double>>& entries) {
    std::map<T, double> merged;
    double total = 0.0;
    for (const auto& [x, w] : entries) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidPmf("make_pmf: negative or non-finite weight");
        merged[x] += w;
        total += w;
    }
    if (!(total > 0.0)) throw InvalidPmf("make_pmf: all weights are zero");
    std::vector<std::pair<T, double>> out;
    out.reserve(merged.size());
    for (auto& [x, w] : merged) out.emplace_back(x, w / total);
    return FinitePmf<T>::from_sorted(std::move(out));
}

template <class T>
FinitePmf<T> point_mass(const T& x) {
    return FinitePmf<T>::from_sorted({{x, 1.0}});
}

inline FinitePmf<int> bernoulli(double p) {
    if (p <= 0.0) return point_mass(0);
    if (p >= 1.0) return point_mass(1);
    return FinitePmf<int>::from_sorted({{0, 1.0 - p}, {1, p}});
}

template <class T>
FinitePmf<T> uniform_pmf(const std::vector<T>& xs) {
    std::vector<std::pair<T, double>> e;
    for (const auto& x : xs) e.emplace_back(x, 1.0);
    return make_pmf(e);
}

template <class T, class Pred>
FinitePmf<T> condition(const FinitePmf<T>& p, const Pred& e) {
    std::vector<std::pair<T, double>> kept;
    double total = 0.0;
    for (const auto& [x, w] : p) {
        if (w > 0.0 && e(x)) {
            kept.emplace_back(x, w);
            total += w;
        }
    }
    if (!(total > 0.0)) throw ZeroProbabilityEvent("condition: event has zero probability");
    for (auto& kv : kept) kv.second /= total;
    return FinitePmf<T>::from_sorted(std::move(kept));
}

// Independent product; outcomes are tuples stored as vectors.
template <class T>
FinitePmf<std::vector<T>> product(const std::vector<FinitePmf<T>>& parts) {
    if (parts.empty()) throw InvalidPmf("product: no factors");
    std::vector<std::pair<std::vector<T>, double>> cur{{{}, 1.0}};
    for (const auto& part : parts) {
        std::vector<std::pair<std::vector<T>, double>> next;
        next.reserve(cur.size() * part.size());
        for (const auto& [prefix, p] : cur) {
            for (const auto& [x, q] : part) {
                auto t = prefix;
                t.push_back(x);
                next.emplace_back(std::move(t), p * q);
            }
        }
        cur = std::move(next);
    }
    // Lexicographic order of the factors' sorted supports is already sorted.
    return FinitePmf<std::vector<T>>::from_sorted(std::move(cur));
}

template <class A, class B>
FinitePmf<std::pair<A, B>> product2(const FinitePmf<A>& pa, const FinitePmf<B>& pb) {
    std::vector<std::pair<std::pair<A, B>, double>> out;
    out.reserve(pa.size() * pb.size());
    for (const auto& [a, p] : pa)
        for (const auto& [b, q] : pb) out.push_back({{a, b}, p * q});
    return FinitePmf<std::pair<A, B>>::from_sorted(std::move(out));
}

template <class T>
FinitePmf<std::vector<T>> marginalize(const FinitePmf<std::vector<T>>& p,
                                      const std::vector<std::size_t>& keep) {
    std::map<std::vector<T>, double> acc;
    for (const auto& [x, w] : p) {
        std::vector<T> y;
        y.reserve(keep.size());
        for (std::size_t k : keep) {
            if (k >= x.size()) throw BadCoordinate("marginalize: coordinate out of range");
            y.push_back(x[k]);
        }
        acc[std::move(y)] += w;
    }
    std::vector<std::pair<std::vector<T>, double>> out(acc.begin(), acc.end());
    return FinitePmf<std::vector<T>>::from_sorted(std::move(out));
}

// Pushforward through a deterministic map.
template <class T, class F>
auto map_pmf(const FinitePmf<T>& p, const F& f) {
    using U = std::decay_t<decltype(f(std::declval<const T&>()))>;
    std::map<U, double> acc;
    for (const auto& [x, w] : p) acc[f(x)] += w;
    std::vector<std::pair<U, double>> out(acc.begin(), acc.end());
    return FinitePmf<U>::from_sorted(std::move(out));
}

template <class A, class B>
FinitePmf<A> first_marginal(const FinitePmf<std::pair<A, B>>& p) {
    return map_pmf(p, [](const std::pair<A, B>& ab) { return ab.first; });
}

template <class A, class B>
FinitePmf<B> second_marginal(const FinitePmf<std::pair<A, B>>& p) {
    return map_pmf(p, [](const std::pair<A, B>& ab) { return ab.second; });
}

template <class T>
const T& sample_pmf(const FinitePmf<T>& p, RngStream& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    const auto& es = p.entries();
    for (const auto& e : es) {
        acc += e.second;
        if (u < acc) return e.first;
    }
    // u landed in the rounding gap above the last partial sum
    for (auto it = es.rbegin(); it != es.rend(); ++it)
        if (it->second > 0.0) return it->first;
    return es.back().first;
}

template <class T>
double total_variation(const FinitePmf<T>& p, const FinitePmf<T>& q) {
    const auto& a = p.entries();
    const auto& b = q.entries();
    std::size_t i = 0, k = 0;
    double s = 0.0;
    while (i < a.size() || k < b.size()) {
        if (k == b.size() || (i < a.size() && a[i].first < b[k].first)) {
            s += a[i++].second;
        } else if (i == a.size() || b[k].first < a[i].first) {
            s += b[k++].second;
        } else {
            s += std::abs(a[i++].second - b[k++].second);
        }
    }
    return std::min(1.0, 0.5 * s);
}

// Empirical pmf from a list of samples.
template <class T>
FinitePmf<T> empirical_pmf(const std::vector<T>& samples) {
    std::map<T, double> acc;
    for (const auto& s : samples) acc[s] += 1.0;
    std::vector<std::pair<T, double>> out;
    for (auto& [x, c] : acc) out.emplace_back(x, c / static_cast<double>(samples.size()));
    return FinitePmf<T>::from_sorted(std::move(out));
}

}  // namespace parrep
