#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "cost.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "montecarlo.hpp"
#include "operator_algebra.hpp"
#include "optimizer.hpp"
#include "rng.hpp"

namespace mlbgg
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_usage = 1,
    exit_config = 2,
    exit_runtime = 3,
    exit_selftest = 4,
};

/// Raised for filesystem problems while writing outputs.
class OutputError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

namespace detail
{

inline std::string provenance(Scenario const& s)
{
    return std::string("mlbgg ") + tool_version + " fingerprint=" + fingerprint(s)
           + " seed=" + format_number(static_cast<std::uint64_t>(s.seed));
}

inline json provenance_json(Scenario const& s)
{
    return {{"version", tool_version}, {"fingerprint", fingerprint(s)}, {"seed", s.seed}};
}

inline std::filesystem::path prepare_dir(std::string const& dir)
{
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec)
    {
        throw OutputError("cannot create output directory " + dir + ": " + ec.message());
    }
    return p;
}

inline std::ofstream open_out(std::filesystem::path const& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw OutputError("cannot write " + path.string());
    }
    return out;
}

inline void write_json(std::filesystem::path const& path, json const& doc)
{
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    if (!out)
    {
        throw OutputError("write failed for " + path.string());
    }
}

/// The effective configuration, loadable again with --config. The
/// provenance line is a comment, which the config reader skips.
inline void write_effective_config(std::filesystem::path const& dir, ExperimentConfig const& cfg)
{
    auto out = open_out(dir / "effective_config.json");
    out << "// " << provenance(cfg.scenario) << '\n' << config_to_json(cfg).dump(2) << '\n';
}

template<class T>
std::string optional_cell(std::optional<T> const& v)
{
    if (!v)
    {
        return "";
    }
    if constexpr (std::is_floating_point_v<T>)
    {
        return format_number(static_cast<double>(*v));
    }
    else
    {
        return format_number(static_cast<std::int64_t>(*v));
    }
}

} // namespace detail

//---------------------------------------------------------------------------//
// simulate
//---------------------------------------------------------------------------//

struct SimulateOutput
{
    SimulationReport report;
    std::filesystem::path report_path;
    std::filesystem::path trials_path;
};

/*!
 * Writes report.json, trials.csv and effective_config.json into the output
 * directory. trials.csv columns: layer, trial, network, strategy, backup,
 * nu, mu, nu2, winner, burst, tau_prev, attacker_prev, attacker_at.
 * Empty cells stand for "not reached".
 */
inline SimulateOutput cmd_simulate(ExperimentConfig const& cfg)
{
    auto const dir = detail::prepare_dir(cfg.output_dir);
    auto result = run_trials(cfg.scenario, cfg.workers, true);

    SimulateOutput out;
    out.report = result.report;
    out.report_path = dir / "report.json";
    out.trials_path = dir / "trials.csv";
    detail::write_json(out.report_path, report_to_json(result.report));

    auto csv_file = detail::open_out(out.trials_path);
    CsvWriter csv(csv_file, detail::provenance(cfg.scenario),
                  {"layer", "trial", "network", "strategy", "backup", "nu", "mu", "nu2", "winner",
                   "burst", "tau_prev", "attacker_prev", "attacker_at"});
    for (auto const& r : result.rows)
    {
        csv.cell(static_cast<std::int64_t>(r.layer))
            .cell(static_cast<std::uint64_t>(r.trial))
            .cell(static_cast<std::uint64_t>(r.network))
            .cell(std::string(to_string(r.strategy)))
            .cell(static_cast<std::int64_t>(r.backup))
            .cell(detail::optional_cell(r.outcome.nu))
            .cell(detail::optional_cell(r.outcome.mu))
            .cell(detail::optional_cell(r.outcome.nu2))
            .cell(std::string(to_string(r.outcome.winner)))
            .cell(r.burst)
            .cell(detail::optional_cell(r.outcome.tau_prev))
            .cell(detail::optional_cell(r.outcome.attacker_prev))
            .cell(detail::optional_cell(r.outcome.attacker_at));
        csv.end_row();
    }
    if (!csv_file)
    {
        throw OutputError("write failed for " + out.trials_path.string());
    }
    detail::write_effective_config(dir, cfg);
    return out;
}

//---------------------------------------------------------------------------//
// optimize-backup
//---------------------------------------------------------------------------//

struct BackupRun
{
    std::uint64_t seed = 0;
    BackupOptimum optimum;
};

struct BackupCommandOutput
{
    std::vector<BackupRun> runs;
    json summary;
};

/// One curve per repetition (root seeds seed, seed + 1, ...), written to
/// backup_curve_<r>.csv with columns B, mean_cost, stderr, q1_B,
/// censor_rate; backup_summary.json lists each optimum.
inline BackupCommandOutput cmd_optimize_backup(ExperimentConfig const& cfg)
{
    auto const dir = detail::prepare_dir(cfg.output_dir);
    auto const& sw = cfg.sweep;
    BackupCommandOutput out;
    json runs = json::array();
    std::vector<Count> optima;
    for (std::size_t r = 0; r < sw.repeats; ++r)
    {
        Scenario s = cfg.scenario;
        s.seed = cfg.scenario.seed + r;
        auto opt = optimize_backup(s, sw.backup_min, sw.backup_max, s.n_trials, s.seed,
                                   cfg.workers);

        auto file = detail::open_out(dir / ("backup_curve_" + std::to_string(r) + ".csv"));
        CsvWriter csv(file, detail::provenance(s),
                      {"B", "mean_cost", "stderr", "q1_B", "censor_rate"});
        for (auto const& p : opt.curve.points)
        {
            csv.cell(static_cast<std::int64_t>(std::llround(p.x)))
                .cell(p.cost)
                .cell(p.std_error)
                .cell(p.burst_rate)
                .cell(p.censor_rate);
            csv.end_row();
        }

        optima.push_back(opt.best_backup);
        auto const best = static_cast<std::size_t>(opt.best_backup - sw.backup_min);
        runs.push_back({{"seed", s.seed},
                        {"best_backup", opt.best_backup},
                        {"best_cost", opt.curve.points[best].cost},
                        {"best_stderr", opt.curve.points[best].std_error},
                        {"baseline_cost", opt.baseline_cost},
                        {"efficiency", opt.efficiency},
                        {"interior", opt.interior(sw.backup_min, sw.backup_max)}});
        out.runs.push_back({s.seed, std::move(opt)});
    }
    auto const [lo, hi] = std::minmax_element(optima.begin(), optima.end());
    out.summary = detail::provenance_json(cfg.scenario);
    out.summary["backup_range"] = {sw.backup_min, sw.backup_max};
    out.summary["trials"] = cfg.scenario.n_trials;
    out.summary["runs"] = std::move(runs);
    out.summary["optimum_min"] = *lo;
    out.summary["optimum_max"] = *hi;
    detail::write_json(dir / "backup_summary.json", out.summary);
    detail::write_effective_config(dir, cfg);
    return out;
}

//---------------------------------------------------------------------------//
// optimize-alpha
//---------------------------------------------------------------------------//

struct AlphaCommandOutput
{
    double rho1 = 0.0;
    std::vector<Count> etas;
    std::vector<AlphaOptimum> optima;
    double alpha_star_spread = 0.0;
    json summary;
};

/// alpha grid x eta grid into alpha_curve.csv (alpha, eta, mean_cost,
/// stderr, r1_alpha); alpha_summary.json carries alpha0 and alpha* per eta.
inline AlphaCommandOutput cmd_optimize_alpha(ExperimentConfig const& cfg,
                                             std::ostream* warnings = nullptr)
{
    auto const dir = detail::prepare_dir(cfg.output_dir);
    auto const& s0 = cfg.scenario;
    s0.validate();
    AlphaCommandOutput out;
    out.rho1 = estimate_scenario_rho1(s0.layer1, s0.n_trials, s0.seed, cfg.workers);

    auto file = detail::open_out(dir / "alpha_curve.csv");
    CsvWriter csv(file, detail::provenance(s0),
                  {"alpha", "eta", "mean_cost", "stderr", "r1_alpha"});
    json per_eta = json::array();
    for (Count const eta : cfg.sweep.eta_grid)
    {
        Scenario s = s0;
        s.layer0.eta = eta;
        auto opt = optimize_alpha(s, cfg.sweep.alpha_grid, out.rho1, s.n_trials, s.seed,
                                  cfg.workers);
        for (auto const& p : opt.curve.points)
        {
            csv.cell(p.x)
                .cell(static_cast<std::int64_t>(eta))
                .cell(p.cost)
                .cell(p.std_error)
                .cell(p.burst_rate);
            csv.end_row();
        }
        if (!opt.alpha0 && warnings)
        {
            *warnings << "warning: no grid alpha makes Action cheaper than DoNothing at eta="
                      << eta << "; alpha* falls back to rho1\n";
        }
        auto const best = argmin_first(opt.curve.points);
        per_eta.push_back({{"eta", eta},
                           {"alpha0", opt.alpha0 ? json(*opt.alpha0) : json(nullptr)},
                           {"alpha_star", opt.alpha_star},
                           {"r0", opt.r0},
                           {"p_prev_below", opt.p_prev_below},
                           {"min_cost_alpha", opt.curve.points[best].x},
                           {"min_cost", opt.curve.points[best].cost}});
        out.etas.push_back(eta);
        out.optima.push_back(std::move(opt));
    }
    auto const [lo, hi] = std::minmax_element(
        out.optima.begin(), out.optima.end(),
        [](auto const& a, auto const& b) { return a.alpha_star < b.alpha_star; });
    out.alpha_star_spread = hi->alpha_star - lo->alpha_star;

    out.summary = detail::provenance_json(s0);
    out.summary["rho1"] = out.rho1;
    out.summary["trials"] = s0.n_trials;
    out.summary["r1_variant"] = std::string(to_string(s0.layer0.r1_variant));
    out.summary["per_eta"] = std::move(per_eta);
    out.summary["alpha_star_spread"] = out.alpha_star_spread;
    detail::write_json(dir / "alpha_summary.json", out.summary);
    detail::write_effective_config(dir, cfg);
    return out;
}

//---------------------------------------------------------------------------//
// optimize-eta
//---------------------------------------------------------------------------//

/// eta_curve.csv: eta, layer1_cost, layer1_stderr, layer0_cost,
/// layer0_stderr, rho1; eta_summary.json: eta1, eta0, eta*.
inline EtaOptimum cmd_optimize_eta(ExperimentConfig const& cfg)
{
    auto const dir = detail::prepare_dir(cfg.output_dir);
    auto const& s = cfg.scenario;
    auto opt = optimize_eta(s, cfg.sweep.eta_grid, s.n_trials, s.seed, cfg.workers);

    auto file = detail::open_out(dir / "eta_curve.csv");
    CsvWriter csv(file, detail::provenance(s),
                  {"eta", "layer1_cost", "layer1_stderr", "layer0_cost", "layer0_stderr", "rho1"});
    for (std::size_t i = 0; i < cfg.sweep.eta_grid.size(); ++i)
    {
        csv.cell(static_cast<std::int64_t>(cfg.sweep.eta_grid[i]))
            .cell(opt.layer1_curve.points[i].cost)
            .cell(opt.layer1_curve.points[i].std_error)
            .cell(opt.layer0_curve.points[i].cost)
            .cell(opt.layer0_curve.points[i].std_error)
            .cell(opt.rho1[i]);
        csv.end_row();
    }
    json summary = detail::provenance_json(s);
    summary["eta1"] = opt.eta1;
    summary["eta0"] = opt.eta0;
    summary["eta_star"] = opt.eta_star;
    detail::write_json(dir / "eta_summary.json", summary);
    detail::write_effective_config(dir, cfg);
    return opt;
}

//---------------------------------------------------------------------------//
// selftest
//---------------------------------------------------------------------------//

struct SelftestCheck
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestReport
{
    std::vector<SelftestCheck> checks;

    bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](auto const& c) { return c.passed; });
    }
};

using InverseFn = std::function<double(ops::TransformPoly<double> const&, ops::Exponent,
                                       ops::Exponent)>;

/// Replaceable kernels, so a fixture can inject a broken inverse.
struct SelftestHooks
{
    InverseFn inverse = [](ops::TransformPoly<double> const& g, ops::Exponent m,
                           ops::Exponent n) { return ops::inverse_d(g, m, n); };
};

namespace detail
{

inline ops::BivariateSeq<double> random_sequence(Pcg32& rng, int max_side)
{
    std::uniform_int_distribution<int> side(1, max_side);
    std::uniform_real_distribution<double> coef(-10.0, 10.0);
    std::bernoulli_distribution keep(0.6);
    int const nx = side(rng);
    int const ny = side(rng);
    ops::BivariateSeq<double> f;
    for (int x = 0; x < nx; ++x)
    {
        for (int y = 0; y < ny; ++y)
        {
            if (keep(rng))
            {
                f.add(x, y, coef(rng));
            }
        }
    }
    return f;
}

} // namespace detail

/// Operator composition identity and the cost-expansion identities.
inline SelftestReport run_selftest(SelftestHooks const& hooks = {})
{
    SelftestReport report;
    constexpr double tol = 1e-12;

    {
        SelftestCheck c{"operator-composition-identity", true, ""};
        Pcg32 rng(20240901, 7);
        for (int i = 0; i < 200 && c.passed; ++i)
        {
            auto const f = detail::random_sequence(rng, 8);
            auto const g = ops::transform_d(f);
            for (ops::Exponent m = 0; m < 8 && c.passed; ++m)
            {
                for (ops::Exponent n = 0; n < 8; ++n)
                {
                    double const got = hooks.inverse(g, m, n);
                    if (std::abs(got - f(m, n)) > tol)
                    {
                        c.passed = false;
                        c.detail = "sample " + std::to_string(i) + " at (" + std::to_string(m)
                                   + "," + std::to_string(n) + "): " + format_number(got)
                                   + " != " + format_number(f(m, n));
                        break;
                    }
                }
            }
        }
        report.checks.push_back(std::move(c));
    }

    {
        SelftestCheck c{"matrix-composition-identity", true, ""};
        Pcg32 rng(20240902, 7);
        std::vector<ops::BivariateSeq<double>> fs;
        ops::IndexMatrix rows;
        std::uniform_int_distribution<int> idx(0, 7);
        for (int l = 0; l < 41; ++l)
        {
            fs.push_back(detail::random_sequence(rng, 8));
            rows.emplace_back(idx(rng), idx(rng));
        }
        auto const gs = ops::matrix_transform(fs);
        for (std::size_t l = 0; l < fs.size(); ++l)
        {
            double const got = hooks.inverse(gs[l], rows[l].first, rows[l].second);
            if (std::abs(got - fs[l](rows[l].first, rows[l].second)) > tol)
            {
                c.passed = false;
                c.detail = "row " + std::to_string(l);
                break;
            }
        }
        report.checks.push_back(std::move(c));
    }

    {
        SelftestCheck c{"action-cost-long-short", true, ""};
        Pcg32 rng(20240903, 7);
        std::uniform_real_distribution<double> money(0.0, 1000.0);
        for (int i = 0; i < 1000; ++i)
        {
            double const c1 = money(rng);
            double const v = money(rng);
            double const q1 = uniform_open01(rng);
            double const a = action_cost_long(c1, v, q1);
            double const b = action_cost_short(c1, v, q1);
            if (std::abs(a - b) > tol * std::max(1.0, std::abs(a)))
            {
                c.passed = false;
                c.detail = "input " + std::to_string(i);
                break;
            }
        }
        report.checks.push_back(std::move(c));
    }

    {
        SelftestCheck c{"layer0-total-cost-expansion", true, ""};
        Pcg32 rng(20240904, 7);
        for (int i = 0; i < 1000; ++i)
        {
            CostParams params;
            params.layer0_value = 1000.0 * uniform_open01(rng);
            params.alliance_cost = 10.0 * uniform_open01(rng);
            params.alliance_fixed_cost = 100.0 * uniform_open01(rng);
            double const alpha = uniform_open01(rng);
            Count const eta = 1 + static_cast<Count>(rng() % 60);
            double const r0 = uniform_open01(rng);
            double const r1 = uniform_open01(rng);
            double const p = uniform_open01(rng);
            double const c0 = params.alliance_action_cost(alpha, eta);
            double const expected =
                (c0 + params.layer0_value * r1) * p + params.layer0_value * r0 * (1.0 - p);
            double const got = layer0_total_cost(params, alpha, eta, r0, r1, p);
            if (std::abs(got - expected) > tol * std::max(1.0, std::abs(expected)))
            {
                c.passed = false;
                c.detail = "input " + std::to_string(i);
                break;
            }
        }
        report.checks.push_back(std::move(c));
    }
    return report;
}

inline void print_selftest(SelftestReport const& r, std::ostream& out)
{
    for (auto const& c : r.checks)
    {
        out << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty())
        {
            out << ": " << c.detail;
        }
        out << '\n';
    }
}

} // namespace mlbgg
