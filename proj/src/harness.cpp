#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "parrep/harness.hpp"

namespace parrep {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("parameter '" + key + "': not a number: '" + v + "'");
}

}  // namespace

std::string ExperimentConfig::str(const std::string& k, const std::string& dflt) const {
    auto it = params.find(k);
    return it == params.end() ? dflt : it->second;
}

long ExperimentConfig::integer(const std::string& k, long dflt) const {
    auto it = params.find(k);
    if (it == params.end()) return dflt;
    double d = parse_real(k, it->second);
    if (d != std::floor(d) || std::abs(d) > 1e15) throw ConfigError("parameter '" + k + "': not an integer");
    return static_cast<long>(d);
}

double ExperimentConfig::real(const std::string& k, double dflt) const {
    auto it = params.find(k);
    return it == params.end() ? dflt : parse_real(k, it->second);
}

std::vector<double> ExperimentConfig::reals(const std::string& k, const std::vector<double>& dflt) const {
    auto it = params.find(k);
    if (it == params.end()) return dflt;
    std::vector<double> out;
    std::istringstream is(it->second);
    std::string part;
    while (std::getline(is, part, ',')) {
        part = trim(part);
        if (!part.empty()) out.push_back(parse_real(k, part));
    }
    if (out.empty()) throw ConfigError("parameter '" + k + "': empty list");
    return out;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"soundness",    "attack-curve",  "skewed-exact", "smoothkl-cert",
                                                   "martingale",   "concentration", "bad-t"};
    return names;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string k = trim(line.substr(0, eq));
        if (k.rfind("--", 0) == 0) k = k.substr(2);
        if (k.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv[k] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        if (k == "seed") {
            try {
                cfg.seed = std::stoull(v);
            } catch (const std::exception&) {
                throw ConfigError("seed: not an unsigned integer: '" + v + "'");
            }
        } else if (k == "out") {
            cfg.out = v;
        } else if (k == "format") {
            if (v != "json" && v != "csv") throw ConfigError("format must be json or csv");
            cfg.format = v;
        } else if (k == "workers") {
            double w = parse_real(k, v);
            if (w < 1 || w != std::floor(w)) throw ConfigError("workers must be a positive integer");
            cfg.workers = static_cast<int>(w);
        } else if (k == "experiment") {
            cfg.experiment = v;
        } else {
            cfg.params[k] = v;
        }
    }
}

bool ExperimentReport::all_pass() const {
    for (const auto& m : metrics)
        if (m.verdict == "fail") return false;
    return true;
}

// ---- emission -------------------------------------------------------------------

namespace {

nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double denum(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double unfmt(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

nlohmann::json report_json(const ExperimentReport& r, bool with_runtime) {
    nlohmann::json cfg;
    cfg["experiment"] = r.config.experiment;
    cfg["seed"] = r.config.seed;
    cfg["format"] = r.config.format;
    cfg["params"] = r.config.params;
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& m : r.metrics) {
        nlohmann::json j;
        j["name"] = m.name;
        j["estimate"] = num(m.estimate);
        j["ci"] = {num(m.ci_low), num(m.ci_high)};
        j["bound"] = m.bound ? num(*m.bound) : nlohmann::json(nullptr);
        j["bound_ref"] = m.bound_ref;
        j["verdict"] = m.verdict;
        metrics.push_back(j);
    }
    nlohmann::json out;
    out["config"] = cfg;
    out["metrics"] = metrics;
    out["caps"] = r.caps;
    if (with_runtime) out["runtime_ms"] = r.runtime_ms;
    out["schema"] = r.schema;
    out["version"] = r.version;
    return out;
}

std::string report_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "experiment,metric,estimate,ci_low,ci_high,bound,verdict\n";
    for (const auto& m : r.metrics) {
        os << csv_field(r.config.experiment) << ',' << csv_field(m.name) << ',' << fmt(m.estimate) << ','
           << fmt(m.ci_low) << ',' << fmt(m.ci_high) << ',' << (m.bound ? fmt(*m.bound) : "") << ',' << m.verdict
           << '\n';
    }
    return os.str();
}

std::string emit_report(const ExperimentReport& r, const std::string& format) {
    if (format == "json") return report_json(r).dump(2) + "\n";
    if (format == "csv") return report_csv(r);
    throw ConfigError("format must be json or csv");
}

void write_report(const ExperimentReport& r, const std::string& format, const std::string& path) {
    std::string text = emit_report(r, format);
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write report to " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<MetricRecord> metrics_from_json(const nlohmann::json& j) {
    std::vector<MetricRecord> out;
    for (const auto& m : j.at("metrics")) {
        MetricRecord r;
        r.name = m.at("name").get<std::string>();
        r.estimate = denum(m.at("estimate"));
        r.ci_low = denum(m.at("ci").at(0));
        r.ci_high = denum(m.at("ci").at(1));
        if (!m.at("bound").is_null()) r.bound = denum(m.at("bound"));
        r.bound_ref = m.at("bound_ref").get<std::string>();
        r.verdict = m.at("verdict").get<std::string>();
        out.push_back(r);
    }
    return out;
}

std::vector<MetricRecord> metrics_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::vector<MetricRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = csv_split(line);
        if (f.size() != 7) throw std::runtime_error("csv: expected 7 fields");
        MetricRecord r;
        r.name = f[1];
        r.estimate = unfmt(f[2]);
        r.ci_low = unfmt(f[3]);
        r.ci_high = unfmt(f[4]);
        if (!f[5].empty()) r.bound = unfmt(f[5]);
        r.verdict = f[6];
        out.push_back(r);
    }
    return out;
}

}  // namespace parrep
