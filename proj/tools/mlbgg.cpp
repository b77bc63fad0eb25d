#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <mlbgg/mlbgg.hpp>

namespace
{

struct Overrides
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    std::optional<std::string> threshold_rule;
    std::optional<std::string> r1_variant;
};

std::optional<std::uint64_t> seed_from_env()
{
    char const* raw = std::getenv("MLBGG_SEED");
    if (raw == nullptr || *raw == '\0')
    {
        return std::nullopt;
    }
    std::string_view text(raw);
    std::uint64_t value = 0;
    auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
    {
        throw mlbgg::ConfigError("MLBGG_SEED", "expected an unsigned 64-bit integer");
    }
    return value;
}

// Precedence: command-line flag, then MLBGG_SEED, then the config file.
mlbgg::ExperimentConfig resolve(Overrides const& o)
{
    using namespace mlbgg;
    ExperimentConfig cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
    auto& s = cfg.scenario;
    if (auto env = seed_from_env())
    {
        s.seed = *env;
    }
    if (o.seed)
    {
        s.seed = *o.seed;
    }
    if (o.trials)
    {
        if (*o.trials < 1)
        {
            throw ConfigError("--trials", "must be at least 1");
        }
        s.n_trials = *o.trials;
    }
    if (o.out)
    {
        cfg.output_dir = *o.out;
    }
    if (o.workers)
    {
        if (*o.workers < 1)
        {
            throw ConfigError("--workers", "must be at least 1");
        }
        cfg.workers = *o.workers;
    }
    if (o.threshold_rule)
    {
        auto const rule = parse_threshold_rule(*o.threshold_rule);
        for (auto& net : s.layer1)
        {
            net.rule = rule;
        }
        s.layer0.rule = rule;
    }
    if (o.r1_variant)
    {
        s.layer0.r1_variant = parse_r1_variant(*o.r1_variant);
    }
    try
    {
        s.validate();
    }
    catch (ParameterError const& e)
    {
        throw ConfigError("scenario", e.what());
    }
    return cfg;
}

void print_simulate(mlbgg::SimulateOutput const& out)
{
    auto const& r = out.report;
    std::cout << "rho1 " << r.rho1.mean << " (stderr " << r.rho1.std_error << ")\n"
              << "layer1 q0 " << r.layer1.burst_do_nothing.mean << "  q1 "
              << r.layer1.burst_action.mean << "\n"
              << "layer0 r0 " << r.layer0.burst_do_nothing.mean << "  r1 "
              << r.layer0.burst_action.mean << "\n"
              << "wrote " << out.report_path.string() << " and " << out.trials_path.string()
              << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo simulator and cost optimizer for the multi-layered blockchain "
                 "governance game"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mlbgg::tool_version);

    Overrides o;
    app.add_option("--config", o.config_path, "JSON experiment config (comments allowed)");
    app.add_option("--seed", o.seed, "root seed; overrides MLBGG_SEED and the config");
    app.add_option("--trials", o.trials, "Monte Carlo trials per experiment");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--workers", o.workers, "worker threads; results do not depend on it");
    app.add_option("--threshold-rule", o.threshold_rule, "half-count rounding")
        ->check(CLI::IsMember({"paper-geq-half", "strict-majority"}));
    app.add_option("--r1-variant", o.r1_variant, "layer-0 Action bursting rule")
        ->check(CLI::IsMember({"threshold-scaled", "binomial-bar"}));

    auto* simulate = app.add_subcommand("simulate", "run both strategies on both layers");
    auto* backup = app.add_subcommand("optimize-backup", "sweep the reserve size B");
    auto* alpha = app.add_subcommand("optimize-alpha", "sweep the alliance acceptance rate");
    auto* eta = app.add_subcommand("optimize-eta", "compare layer sizes over the eta grid");
    auto* selftest = app.add_subcommand("selftest", "check the operator kernel and cost identities");
    for (auto* sub : {simulate, backup, alpha, eta, selftest})
    {
        sub->fallthrough();
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? mlbgg::exit_ok : mlbgg::exit_usage;
    }

    try
    {
        if (selftest->parsed())
        {
            auto const report = mlbgg::run_selftest();
            mlbgg::print_selftest(report, std::cout);
            return report.passed() ? mlbgg::exit_ok : mlbgg::exit_selftest;
        }

        mlbgg::ExperimentConfig cfg;
        try
        {
            cfg = resolve(o);
        }
        catch (mlbgg::ParameterError const& e)
        {
            throw mlbgg::ConfigError("", e.what());
        }

        if (simulate->parsed())
        {
            print_simulate(mlbgg::cmd_simulate(cfg));
        }
        else if (backup->parsed())
        {
            auto const out = mlbgg::cmd_optimize_backup(cfg);
            for (auto const& run : out.runs)
            {
                std::cout << "seed " << run.seed << ": B* = " << run.optimum.best_backup
                          << ", efficiency " << run.optimum.efficiency << "\n";
            }
        }
        else if (alpha->parsed())
        {
            auto const out = mlbgg::cmd_optimize_alpha(cfg, &std::cerr);
            std::cout << "rho1 " << out.rho1 << "\n";
            for (std::size_t i = 0; i < out.etas.size(); ++i)
            {
                auto const& opt = out.optima[i];
                std::cout << "eta " << out.etas[i] << ": alpha0 ";
                if (opt.alpha0)
                {
                    std::cout << *opt.alpha0;
                }
                else
                {
                    std::cout << "none";
                }
                std::cout << ", alpha* " << opt.alpha_star << "\n";
            }
            std::cout << "alpha* spread " << out.alpha_star_spread << "\n";
        }
        else if (eta->parsed())
        {
            auto const out = mlbgg::cmd_optimize_eta(cfg);
            std::cout << "eta1 " << out.eta1 << ", eta0 " << out.eta0 << ", eta* " << out.eta_star
                      << "\n";
        }
        return mlbgg::exit_ok;
    }
    catch (mlbgg::ConfigError const& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return mlbgg::exit_config;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return mlbgg::exit_runtime;
    }
}
