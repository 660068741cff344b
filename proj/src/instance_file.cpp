#include <cmath>
#include <fstream>
#include <sstream>

#include "parrep/harness.hpp"

namespace parrep {

namespace {

std::vector<std::string> words(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

long to_long(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("instance: bad integer for " + what + ": '" + s + "'");
    }
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("instance: bad number for " + what + ": '" + s + "'");
    }
}

Column parse_outcome(const std::string& s, int m) {
    Column c;
    std::istringstream is(s);
    std::string part;
    while (std::getline(is, part, ',')) c.push_back(to_long(part, "outcome symbol"));
    if (static_cast<int>(c.size()) != m) throw ConfigError("instance: outcome '" + s + "' does not have m symbols");
    return c;
}

}  // namespace

Instance parse_instance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int m = -1, n = -1;
    std::vector<std::optional<FinitePmf<Column>>> cols;
    std::optional<MatrixEvent> W;
    std::optional<DenseFamily> fam;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto w = words(line);
        if (w.empty()) continue;
        const std::string at = " (line " + std::to_string(lineno) + ")";
        if (m < 0) {
            if (w.size() != 2) throw ConfigError("instance: header must be 'm n'" + at);
            m = static_cast<int>(to_long(w[0], "m"));
            n = static_cast<int>(to_long(w[1], "n"));
            if (m < 1 || n < 1) throw ConfigError("instance: m, n must be positive" + at);
            cols.assign(static_cast<std::size_t>(n), std::nullopt);
            continue;
        }
        if (w[0] == "col") {
            if (w.size() < 4 || w[1].back() != ':') throw ConfigError("instance: expected 'col j: outcome prob ...'" + at);
            long j = to_long(w[1].substr(0, w[1].size() - 1), "column index");
            if (j < 1 || j > n) throw ConfigError("instance: column index out of range" + at);
            if ((w.size() - 2) % 2 != 0) throw ConfigError("instance: outcome without probability" + at);
            std::vector<std::pair<Column, double>> entries;
            double total = 0.0;
            for (std::size_t k = 2; k < w.size(); k += 2) {
                double p = to_double(w[k + 1], "probability");
                if (p < 0.0) throw ConfigError("instance: negative probability" + at);
                entries.emplace_back(parse_outcome(w[k], m), p);
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) throw ConfigError("instance: column probabilities do not sum to 1" + at);
            cols[static_cast<std::size_t>(j - 1)] = make_pmf(entries);
        } else if (w[0] == "W") {
            if (w.size() < 2) throw ConfigError("instance: W needs a builtin name" + at);
            if (w[1] == "full") {
                W = w_full();
            } else if (w[1] == "colsums-equal") {
                W = w_colsums_equal();
            } else if (w[1] == "xor-zero") {
                W = w_xor_zero();
            } else if (w[1] == "cell") {
                if (w.size() != 5) throw ConfigError("instance: 'W cell i j s'" + at);
                W = w_cell(static_cast<int>(to_long(w[2], "i")) - 1, static_cast<int>(to_long(w[3], "j")) - 1,
                           to_long(w[4], "s"));
            } else {
                throw ConfigError("instance: unknown W builtin '" + w[1] + "'" + at);
            }
        } else if (w[0] == "family") {
            if (w.size() < 2) throw ConfigError("instance: family needs a builtin name" + at);
            if (w[1] == "full") {
                fam = family_full(m, n);
            } else if (w[1] == "rt") {
                fam = family_random_termination(m, n);
            } else if (w[1] == "bitgrid") {
                if (static_cast<int>(w.size()) != 2 + m * n) throw ConfigError("instance: bitgrid needs m*n entries" + at);
                std::vector<int> rows;
                for (std::size_t k = 2; k < w.size(); ++k) rows.push_back(static_cast<int>(to_long(w[k], "bitgrid row")));
                try {
                    fam = family_bit_grid(m, n, rows);
                } catch (const std::exception& e) {
                    throw ConfigError(std::string("instance: ") + e.what() + at);
                }
            } else {
                throw ConfigError("instance: unknown family builtin '" + w[1] + "'" + at);
            }
        } else {
            throw ConfigError("instance: unrecognised line" + at);
        }
    }
    if (m < 0) throw ConfigError("instance: empty file");
    for (int j = 0; j < n; ++j)
        if (!cols[static_cast<std::size_t>(j)]) throw ConfigError("instance: missing column " + std::to_string(j + 1));
    if (!W) throw ConfigError("instance: missing W line");
    if (!fam) throw ConfigError("instance: missing family line");
    std::vector<FinitePmf<Column>> pmfs;
    for (auto& c : cols) pmfs.push_back(*c);
    Instance out{make_base(pmfs, *W), *fam};
    return out;
}

Instance load_instance(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open instance file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_instance(ss.str());
}

}  // namespace parrep
