// pdce: scenario runner for the modulated Kerr cavity.
//
//   pdce run <scenario|config.json> [--out DIR] [--dim N] [--fixed-step]
//   pdce sweep <config.json> [--out DIR] [--jobs K] [--dim N] [--fixed-step]
//   pdce converge <scenario|config.json> [--dim N]
//   pdce list-scenarios
//
// Exit codes: 0 ok, 1 usage or config error, 2 integration failure,
// 3 truncation overflow, 4 convergence check failed, 5 other error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pdce/scenario.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kIntegration = 2, kTruncation = 3, kConvergence = 4, kOther = 5 };

std::string default_out_dir() {
    if (const char* env = std::getenv("PDCE_OUT_DIR"); env && *env) return env;
    return "pdce_out";
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw pdce::DomainError("cannot read config " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw pdce::DomainError("config " + path + " is not valid JSON: " + e.what());
    }
}

bool looks_like_file(const std::string& arg) {
    return std::filesystem::exists(arg) || arg.ends_with(".json");
}

pdce::Scenario resolve_scenario(const std::string& arg) {
    if (auto b = pdce::find_builtin(arg)) return *b;
    if (looks_like_file(arg)) return pdce::scenario_from_json(read_json_file(arg));
    throw pdce::DomainError("unknown scenario " + arg + " (see list-scenarios)");
}

int report(const std::exception& e) {
    if (const auto* f = dynamic_cast<const pdce::IntegrationFailure*>(&e)) {
        std::cerr << "integration failure at s=" << pdce::format_double(f->time) << ": " << e.what()
                  << '\n';
        return kIntegration;
    }
    if (const auto* f = dynamic_cast<const pdce::TruncationOverflow*>(&e)) {
        std::cerr << "truncation overflow at s=" << pdce::format_double(f->time)
                  << " (top-level population " << pdce::format_double(f->population)
                  << "): " << e.what() << '\n';
        return kTruncation;
    }
    if (dynamic_cast<const pdce::ConvergenceFailure*>(&e)) {
        std::cerr << e.what() << '\n';
        return kConvergence;
    }
    if (dynamic_cast<const pdce::DomainError*>(&e) || dynamic_cast<const pdce::InvalidDimension*>(&e)) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parametric photon generation in a modulated Kerr cavity"};
    app.require_subcommand(1);

    std::string out_dir = default_out_dir();
    std::optional<int> dim;
    bool fixed_step = false;
    int jobs = 1;
    std::string target;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--dim", dim, "Fock truncation override")->check(CLI::Range(2, 4096));
        sub->add_flag("--fixed-step", fixed_step, "Fixed-step reproducibility mode");
    };

    auto* run = app.add_subcommand("run", "Run a built-in scenario or a JSON config");
    run->add_option("scenario", target, "Scenario name or config file")->required();
    run->add_option("--out", out_dir, "Output directory (default $PDCE_OUT_DIR or ./pdce_out)");
    add_common(run);

    auto* sw = app.add_subcommand("sweep", "Run a parameter or calibration sweep");
    sw->add_option("config", target, "Sweep config file or built-in sweep name")->required();
    sw->add_option("--out", out_dir, "Output directory");
    sw->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    add_common(sw);

    auto* conv = app.add_subcommand("converge", "Compare <n> at dim and 2 dim");
    conv->add_option("scenario", target, "Scenario name or config file")->required();
    add_common(conv);

    auto* list = app.add_subcommand("list-scenarios", "List built-in scenarios");
    bool as_json = false;
    list->add_flag("--json", as_json, "Print full scenario configs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    pdce::RunOptions opts;
    opts.dim = dim;
    opts.fixed_step = fixed_step;

    try {
        if (*list) {
            if (as_json) {
                nlohmann::json all = nlohmann::json::array();
                for (const auto& s : pdce::builtin_scenarios()) all.push_back(pdce::scenario_to_json(s));
                for (const auto& n : pdce::builtin_sweep_names()) all.push_back(*pdce::find_builtin_sweep(n));
                std::cout << all.dump(2) << '\n';
            } else {
                for (const auto& s : pdce::builtin_scenarios())
                    std::cout << s.name << '\t' << pdce::to_string(s.hamiltonian) << "\tC_K="
                              << s.params.c_k << "\tC_eps=" << s.params.c_eps_tilde
                              << (s.kappa_on ? "\tkappa on" : "\tkappa 0") << '\t' << s.description
                              << '\n';
                for (const auto& n : pdce::builtin_sweep_names())
                    std::cout << n << "\tcalibration sweep over temperature and pump power\n";
            }
            return kOk;
        }
        if (*run) {
            if (auto sweep_cfg = pdce::find_builtin_sweep(target)) {
                const auto m = pdce::run_sweep(*sweep_cfg, out_dir, jobs, opts);
                std::cout << "wrote " << (std::filesystem::path(out_dir) / target).string() << '\n';
                return kOk;
            }
            const auto s = resolve_scenario(target);
            const auto m = pdce::run_scenario(s, out_dir, opts);
            std::cout << "wrote " << (std::filesystem::path(out_dir) / s.name).string() << '\n';
            for (const auto& w : m.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
            return kOk;
        }
        if (*sw) {
            nlohmann::json cfg;
            if (auto b = pdce::find_builtin_sweep(target))
                cfg = *b;
            else
                cfg = read_json_file(target);
            const auto m = pdce::run_sweep(cfg, out_dir, jobs, opts);
            std::cout << "wrote " << m.at("rows").get<std::size_t>() << " rows ("
                      << m.at("failed_rows").get<std::size_t>() << " failed) to "
                      << (std::filesystem::path(out_dir) / m.at("name").get<std::string>()).string()
                      << '\n';
            return kOk;
        }
        if (*conv) {
            const auto s = resolve_scenario(target);
            bool ok = true;
            for (const auto& r : pdce::convergence_check(s, opts)) {
                std::cout << s.name << ' ' << r.run << " dim " << r.dim << " vs " << r.dim_doubled
                          << ": max relative deviation " << pdce::format_double(r.max_rel_deviation)
                          << (r.passed ? " PASS" : " FAIL") << '\n';
                ok = ok && r.passed;
            }
            return ok ? kOk : kConvergence;
        }
    } catch (const std::exception& e) {
        return report(e);
    }
    return kUsage;
}
