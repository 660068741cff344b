// parrep: run one experiment and emit a JSON or CSV report.
//
//   parrep attack-curve --n 20,40,60,80 --trials 100000 --out curve.json
//   parrep skewed-exact --instance tiny.inst --format csv
//   parrep martingale --config run.cfg --seed 7      (flags beat the file)

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "parrep/harness.hpp"

namespace {

struct Flags {
    std::string config;
    std::map<std::string, std::string> kv;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "flat key=value file; flags win on conflict");
    // Stored as raw strings; the harness parses and validates them.
    for (const char* name : {"m", "n", "eps", "delta", "trials", "lambda", "t", "seed", "instance", "out", "format",
                             "workers", "protocol", "k", "instances"}) {
        std::string key = name;
        sub->add_option_function<std::string>(
            "--" + key, [&f, key](const std::string& v) { f.kv[key] = v; }, "");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parallel repetition experiments"};
    app.require_subcommand(1);
    std::map<std::string, Flags> flags;
    for (const auto& name : parrep::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_flags(sub, flags[name]);
    }
    CLI11_PARSE(app, argc, argv);

    std::string name = app.get_subcommands().front()->get_name();
    Flags& f = flags[name];
    try {
        parrep::ExperimentConfig cfg;
        cfg.experiment = name;
        if (!f.config.empty()) {
            auto file = parrep::load_config_file(f.config);
            file.erase("experiment");
            parrep::apply_settings(cfg, file);
        }
        parrep::apply_settings(cfg, f.kv);
        auto rep = parrep::run_experiment(cfg);
        parrep::write_report(rep, cfg.format, cfg.out);
        if (!cfg.out.empty() && cfg.out != "-") {
            for (const auto& m : rep.metrics)
                std::fprintf(stderr, "%-32s %-7s %.6g\n", m.name.c_str(), m.verdict.c_str(), m.estimate);
        }
        return rep.all_pass() ? 0 : 1;
    } catch (const parrep::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
