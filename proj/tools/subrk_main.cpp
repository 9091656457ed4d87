#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "subrk/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"subrk: numerical verification suites for step-2 sub-Riemannian model spaces"};
    app.require_subcommand(1);

    CLI::App* list = app.add_subcommand("list", "list the available suites");

    CLI::App* run = app.add_subcommand("run", "run one suite and emit its report");
    std::string suite, config_path, out_path, format = "json";
    long long seed = -1, samples = -1;
    bool print_config = false;
    run->add_option("suite", suite, "suite name (see `subrk list`)")->required();
    run->add_option("--config", config_path, "JSON config file merged onto the suite defaults");
    run->add_option("--seed", seed, "override the seed config key");
    run->add_option("--samples", samples, "override the sample-count config key");
    run->add_option("--out", out_path, "write the report to this file instead of stdout");
    run->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_flag("--print-config", print_config,
                  "print the effective config as JSON and exit without running");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 3;
    }

    try {
        if (list->parsed()) {
            for (const std::string& name : subrk::suite_names())
                std::cout << name << "\t" << subrk::suite_description(name) << "\n";
            return 0;
        }
        subrk::SuiteConfig cfg = config_path.empty()
                                     ? subrk::default_config(suite)
                                     : subrk::load_config(read_file(config_path), suite);
        if (seed >= 0) {
            if (!cfg.values.contains("seed"))
                throw std::runtime_error("suite '" + suite + "' takes no seed");
            cfg.values["seed"] = static_cast<std::uint64_t>(seed);
        }
        if (samples >= 0) {
            const char* keys[] = {"n_samples", "n_paths", "n_polys", "n_configs", "n_points"};
            bool found = false;
            for (const char* k : keys) {
                if (cfg.values.contains(k)) {
                    cfg.values[k] = samples;
                    found = true;
                    break;
                }
            }
            if (!found) throw std::runtime_error("suite '" + suite + "' takes no sample count");
        }
        if (print_config) {
            subrk::Json doc;
            doc["suite"] = cfg.suite;
            for (const auto& item : cfg.values.items()) doc[item.key()] = item.value();
            std::cout << doc.dump(2) << "\n";
            return 0;
        }
        subrk::SuiteReport report = subrk::run_suite(cfg);
        if (out_path.empty())
            subrk::emit_report(report, format, std::cout);
        else
            subrk::emit_report_file(report, format, out_path);
        return report.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "subrk: " << e.what() << "\n";
        return 3;
    }
}
