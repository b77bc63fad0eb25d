#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "exit_game.hpp"
#include "layer0.hpp"
#include "layer1.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "summary.hpp"

namespace mlbgg
{

inline constexpr char const* tool_version = "1.0.0";

/// Per-layer aggregates of one run.
struct LayerReport
{
    /// E[nu] over trials with a decision epoch (nu >= 1, not censored).
    Estimate exit_index;
    /// E[tau_{nu-1}] over the same trials.
    Estimate decision_epoch;
    double tau0 = 0.0;
    double spacing = 0.0;
    /// |E[tau_{nu-1}] - (tau0 + spacing (E[nu] - 1))|.
    double decision_identity_residual = 0.0;
    Estimate burst_do_nothing;
    Estimate burst_action;
    double censor_rate_do_nothing = 0.0;
    double censor_rate_action = 0.0;
    /// P{count one epoch before exit below the bar}, over all trials.
    double prev_below = 0.0;
    std::size_t pre_game = 0;
    std::size_t exit_censored = 0;
    std::size_t samples = 0;
};

struct SimulationReport
{
    std::string version = tool_version;
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t networks = 0;
    /// Per-trial honest-win fraction over the subordinate networks.
    Estimate rho1;
    double mean_backup = 0.0;
    LayerReport layer1;
    LayerReport layer0;
    double alpha = 0.0;
    Count layer0_action_bar = 0;
};

/// One row of the per-trial CSV.
struct TrialRow
{
    int layer = 1;
    std::size_t trial = 0;
    std::size_t network = 0;
    Strategy strategy = Strategy::do_nothing;
    Count backup = 0;
    ExitOutcome outcome;
    bool burst = false;
};

struct SimulationResult
{
    SimulationReport report;
    std::vector<TrialRow> rows;
};

namespace detail
{

struct LayerAccumulator
{
    std::vector<double> nu;
    std::vector<double> tau_prev;
    std::vector<double> burst0;
    std::vector<double> burst1;
    std::size_t censored0 = 0;
    std::size_t censored1 = 0;
    std::size_t prev_below = 0;
    std::size_t pre_game = 0;
    std::size_t exit_censored = 0;

    void add(ExitOutcome const& base, bool burst_action, bool censored_action)
    {
        burst0.push_back(base.burst ? 1.0 : 0.0);
        burst1.push_back(burst_action ? 1.0 : 0.0);
        censored0 += base.winner == Winner::censored ? 1 : 0;
        censored1 += censored_action ? 1 : 0;
        prev_below += base.prev_below_bar() ? 1 : 0;
        if (!base.nu)
        {
            ++exit_censored;
        }
        else if (*base.nu == 0)
        {
            ++pre_game;
        }
        else
        {
            nu.push_back(static_cast<double>(*base.nu));
            tau_prev.push_back(*base.tau_prev);
        }
    }

    LayerReport finish(ObservationSchedule const& schedule) const
    {
        LayerReport r;
        auto const n = static_cast<double>(burst0.size());
        r.samples = burst0.size();
        r.tau0 = schedule.tau0;
        r.spacing = schedule.spacing;
        // Exit indices count from zero at tau0; with nu >= 1 the mean is >= 1.
        if (!nu.empty())
        {
            r.exit_index = summarize(nu);
            r.decision_epoch = summarize(tau_prev);
            r.decision_identity_residual = std::abs(
                r.decision_epoch.mean - (r.tau0 + r.spacing * (r.exit_index.mean - 1.0)));
        }
        r.burst_do_nothing = summarize(burst0);
        r.burst_action = summarize(burst1);
        r.censor_rate_do_nothing = static_cast<double>(censored0) / n;
        r.censor_rate_action = static_cast<double>(censored1) / n;
        r.prev_below = static_cast<double>(prev_below) / n;
        r.pre_game = pre_game;
        r.exit_censored = exit_censored;
        return r;
    }
};

} // namespace detail

/*!
 * Full two-pass protocol.
 *
 * Pass 1 races every subordinate network unassisted to estimate rho1.
 * Pass 2 replays the same paths (same substreams) with reserves drawn from
 * Binomial(eta, rho1) and races the supervising network under both
 * strategies. The result depends only on the scenario, never on `workers`.
 */
inline SimulationResult run_trials(Scenario const& scenario, std::size_t workers = 1,
                                   bool keep_rows = true)
{
    scenario.validate();
    auto const& nets = scenario.layer1;
    std::size_t const networks = nets.size();
    std::size_t const trials = scenario.n_trials;
    std::uint64_t const seed = scenario.seed;
    Count const eta = scenario.eta();

    std::vector<ObservationSchedule> schedules;
    for (auto const& net : nets)
    {
        schedules.push_back(net.schedule());
    }

    // Pass 1.
    std::vector<std::vector<Layer1TrialRecord>> unassisted(
        networks, std::vector<Layer1TrialRecord>(trials));
    parallel_for(trials, workers, [&](std::size_t t) {
        for (std::size_t l = 0; l < networks; ++l)
        {
            auto rng = substream(seed, StreamPurpose::layer1_path, t, l);
            auto const path = generate_path(nets[l], schedules[l], rng);
            unassisted[l][t] = make_layer1_record(
                adjudicate(path, schedules[l], nets[l].attacker_bar(), nets[l].honest_bar()),
                Strategy::do_nothing, 0);
        }
    });
    double const rho1 = estimate_rho1(unassisted);

    // Pass 2.
    Layer0Config l0 = scenario.layer0;
    l0.supply = BackupAllocation{l0.eta, rho1};
    auto const race0 = l0.as_race();
    auto const schedule0 = l0.schedule();

    std::vector<std::vector<Layer1TrialRecord>> assisted(trials,
                                                         std::vector<Layer1TrialRecord>(networks));
    std::vector<Layer0TrialRecord> layer0_none(trials);
    std::vector<Layer0TrialRecord> layer0_action(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        for (std::size_t l = 0; l < networks; ++l)
        {
            auto rng = substream(seed, StreamPurpose::layer1_path, t, l);
            auto const path = generate_path(nets[l], schedules[l], rng);
            auto supply_rng = substream(seed, StreamPurpose::backup_supply, t, l);
            Count const backup = sample_backup(eta, rho1, supply_rng);
            assisted[t][l] = make_layer1_record(adjudicate(path, schedules[l],
                                                           nets[l].attacker_bar(),
                                                           nets[l].honest_bar(), backup),
                                                Strategy::action, backup);
        }
        auto rng = substream(seed, StreamPurpose::layer0_path, t);
        auto const path = generate_path(race0, schedule0, rng);
        auto supply_rng = substream(seed, StreamPurpose::alliance_supply, t);
        layer0_none[t] =
            detail::adjudicate_layer0(l0, path, schedule0, Strategy::do_nothing, supply_rng);
        layer0_action[t] =
            detail::adjudicate_layer0(l0, path, schedule0, Strategy::action, supply_rng);
    });

    SimulationResult result;
    auto& rep = result.report;
    rep.fingerprint = fingerprint(scenario);
    rep.seed = seed;
    rep.trials = trials;
    rep.networks = networks;
    rep.alpha = l0.alpha;
    rep.layer0_action_bar = l0.action_bar();

    detail::LayerAccumulator acc1;
    detail::LayerAccumulator acc0;
    std::vector<double> rho_per_trial(trials);
    double backup_sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t)
    {
        double wins = 0.0;
        for (std::size_t l = 0; l < networks; ++l)
        {
            auto const& base = unassisted[l][t];
            auto const& act = assisted[t][l];
            wins += base.honest_won ? 1.0 : 0.0;
            backup_sum += static_cast<double>(act.backup);
            acc1.add(base.outcome, act.burst, act.outcome.winner == Winner::censored);
        }
        rho_per_trial[t] = wins / static_cast<double>(networks);
        acc0.add(layer0_none[t].outcome, layer0_action[t].burst,
                 !layer0_action[t].burst && !layer0_action[t].outcome.mu.has_value());
    }
    rep.rho1 = summarize(rho_per_trial);
    rep.mean_backup = backup_sum / static_cast<double>(trials * networks);
    rep.layer1 = acc1.finish(schedules.front());
    rep.layer0 = acc0.finish(schedule0);

    if (keep_rows)
    {
        result.rows.reserve(trials * (2 * networks + 2));
        for (std::size_t t = 0; t < trials; ++t)
        {
            for (std::size_t l = 0; l < networks; ++l)
            {
                auto const& base = unassisted[l][t];
                auto const& act = assisted[t][l];
                result.rows.push_back({1, t, l, Strategy::do_nothing, 0, base.outcome, base.burst});
                result.rows.push_back(
                    {1, t, l, Strategy::action, act.backup, act.outcome, act.burst});
            }
            result.rows.push_back({0, t, 0, Strategy::do_nothing, 0, layer0_none[t].outcome,
                                   layer0_none[t].burst});
            result.rows.push_back({0, t, 0, Strategy::action, rep.layer0_action_bar,
                                   layer0_action[t].outcome, layer0_action[t].burst});
        }
    }
    return result;
}

inline json estimate_to_json(Estimate const& e)
{
    return {{"mean", e.mean},
            {"stderr", e.std_error},
            {"ci95", {e.ci_low, e.ci_high}},
            {"count", e.count},
            {"degenerate", e.degenerate}};
}

inline json layer_to_json(LayerReport const& r)
{
    return {{"exit_index", estimate_to_json(r.exit_index)},
            {"decision_epoch", estimate_to_json(r.decision_epoch)},
            {"tau0", r.tau0},
            {"spacing", r.spacing},
            {"decision_identity_residual", r.decision_identity_residual},
            {"burst_do_nothing", estimate_to_json(r.burst_do_nothing)},
            {"burst_action", estimate_to_json(r.burst_action)},
            {"censor_rate_do_nothing", r.censor_rate_do_nothing},
            {"censor_rate_action", r.censor_rate_action},
            {"prev_below", r.prev_below},
            {"pre_game", r.pre_game},
            {"exit_censored", r.exit_censored},
            {"samples", r.samples}};
}

inline json report_to_json(SimulationReport const& r)
{
    return {{"version", r.version},
            {"fingerprint", r.fingerprint},
            {"seed", r.seed},
            {"trials", r.trials},
            {"networks", r.networks},
            {"rho1", estimate_to_json(r.rho1)},
            {"mean_backup", r.mean_backup},
            {"alpha", r.alpha},
            {"layer0_action_bar", r.layer0_action_bar},
            {"layer1", layer_to_json(r.layer1)},
            {"layer0", layer_to_json(r.layer0)}};
}

} // namespace mlbgg
