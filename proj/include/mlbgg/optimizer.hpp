#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cost.hpp"
#include "errors.hpp"
#include "exit_game.hpp"
#include "layer0.hpp"
#include "layer1.hpp"
#include "parallel.hpp"
#include "scenario.hpp"
#include "summary.hpp"

namespace mlbgg
{

struct CostPoint
{
    double x = 0.0;
    double cost = 0.0;
    double std_error = 0.0;
    /// q1(B) or r1_alpha at this point (averaged over networks for layer 1).
    double burst_rate = 0.0;
    double censor_rate = 0.0;
};

struct CostCurve
{
    std::vector<CostPoint> points;

    void validate() const
    {
        for (std::size_t i = 1; i < points.size(); ++i)
        {
            if (!(points[i].x > points[i - 1].x))
            {
                throw InvariantError("cost curve decision values must strictly increase");
            }
        }
    }
};

/// Index of the smallest cost; ties go to the smallest decision value.
inline std::size_t argmin_first(std::span<CostPoint const> points)
{
    if (points.empty())
    {
        throw ParameterError("argmin of an empty curve");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
    {
        if (points[i].cost < points[best].cost)
        {
            best = i;
        }
    }
    return best;
}

//---------------------------------------------------------------------------//
// Subordinate layer
//---------------------------------------------------------------------------//

/// Unassisted statistics of each subordinate network.
struct NetworkBaseline
{
    double q0 = 0.0;
    double p_prev_below = 0.0;
    double honest_win_rate = 0.0;
    double censor_rate = 0.0;
};

namespace detail
{

struct Layer1Cell
{
    bool burst0 = false;
    bool prev_below = false;
    bool honest_won = false;
    bool censored = false;
    bool honest_exits = false;
    std::vector<char> burst_by_backup;
};

/// Unassisted race of network `l` in trial `t`; the path stream is the one
/// every consumer of (seed, t, l) sees.
inline std::pair<ExitOutcome, std::vector<Count>>
layer1_race(Layer1NetworkConfig const& cfg, ObservationSchedule const& schedule,
            std::uint64_t seed, std::size_t t, std::size_t l)
{
    auto rng = substream(seed, StreamPurpose::layer1_path, t, l);
    auto path = generate_path(cfg, schedule, rng);
    auto base = adjudicate(path, schedule, cfg.attacker_bar(), cfg.honest_bar());
    return {std::move(base), std::move(path.attacker)};
}

inline std::vector<NetworkBaseline>
baselines_from(std::vector<std::vector<Layer1Cell>> const& cells, std::size_t networks)
{
    std::vector<NetworkBaseline> out(networks);
    auto const n = static_cast<double>(cells.size());
    for (auto const& trial : cells)
    {
        for (std::size_t l = 0; l < networks; ++l)
        {
            out[l].q0 += trial[l].burst0 ? 1.0 : 0.0;
            out[l].p_prev_below += trial[l].prev_below ? 1.0 : 0.0;
            out[l].honest_win_rate += trial[l].honest_won ? 1.0 : 0.0;
            out[l].censor_rate += trial[l].censored ? 1.0 : 0.0;
        }
    }
    for (auto& b : out)
    {
        b.q0 /= n;
        b.p_prev_below /= n;
        b.honest_win_rate /= n;
        b.censor_rate /= n;
    }
    return out;
}

} // namespace detail

/// rho1 from unassisted races of every subordinate network.
inline double estimate_scenario_rho1(std::span<Layer1NetworkConfig const> networks,
                                     std::size_t n_trials, std::uint64_t seed,
                                     std::size_t workers = 1)
{
    if (n_trials < 1)
    {
        throw ParameterError("n_trials must be at least 1");
    }
    std::vector<ObservationSchedule> schedules;
    for (auto const& net : networks)
    {
        net.validate();
        schedules.push_back(net.schedule());
    }
    std::vector<std::vector<Layer1TrialRecord>> per_network(
        networks.size(), std::vector<Layer1TrialRecord>(n_trials));
    parallel_for(n_trials, workers, [&](std::size_t t) {
        for (std::size_t l = 0; l < networks.size(); ++l)
        {
            auto [base, attacker] = detail::layer1_race(networks[l], schedules[l], seed, t, l);
            per_network[l][t] = make_layer1_record(std::move(base), Strategy::do_nothing, 0);
        }
    });
    return estimate_rho1(per_network);
}

/// Coupled Monte Carlo evaluation of the subordinate-layer cost at every
/// reserve size in [backup_min, backup_max].
struct BackupSweep
{
    CostCurve curve;
    std::vector<NetworkBaseline> baselines;
    /// Cost with the safety mode disabled: sum_l V_l q0_l.
    double baseline_cost = 0.0;
    /// burst[t][l][b] for diagnostics and monotonicity checks.
    std::vector<std::vector<std::vector<char>>> bursts;
};

inline BackupSweep sweep_backup(Scenario const& scenario, Count backup_min, Count backup_max,
                                std::size_t n_trials, std::uint64_t seed, std::size_t workers = 1,
                                bool keep_bursts = false)
{
    scenario.validate();
    if (backup_min < 0 || backup_max < backup_min)
    {
        throw ParameterError("empty or negative backup range");
    }
    if (n_trials < 1)
    {
        throw ParameterError("n_trials must be at least 1");
    }
    auto const& nets = scenario.layer1;
    std::size_t const networks = nets.size();
    auto const grid = static_cast<std::size_t>(backup_max - backup_min + 1);

    std::vector<ObservationSchedule> schedules;
    for (auto const& net : nets)
    {
        schedules.push_back(net.schedule());
    }

    std::vector<std::vector<detail::Layer1Cell>> cells(
        n_trials, std::vector<detail::Layer1Cell>(networks));
    parallel_for(n_trials, workers, [&](std::size_t t) {
        for (std::size_t l = 0; l < networks; ++l)
        {
            auto [base, attacker] = detail::layer1_race(nets[l], schedules[l], seed, t, l);
            auto& cell = cells[t][l];
            cell.burst0 = base.burst;
            cell.prev_below = base.prev_below_bar();
            cell.honest_won = base.winner == Winner::honest;
            cell.censored = base.winner == Winner::censored;
            cell.honest_exits = base.mu.has_value();
            cell.burst_by_backup.resize(grid);
            auto const bar = nets[l].attacker_bar();
            for (std::size_t b = 0; b < grid; ++b)
            {
                cell.burst_by_backup[b] =
                    burst_with_backup(base, attacker, bar, backup_min + static_cast<Count>(b));
            }
        }
    });

    BackupSweep out;
    out.baselines = detail::baselines_from(cells, networks);
    for (std::size_t l = 0; l < networks; ++l)
    {
        out.baseline_cost += scenario.cost.network_value(l) * out.baselines[l].q0;
    }

    std::vector<double> per_trial(n_trials);
    for (std::size_t b = 0; b < grid; ++b)
    {
        Count const backup = backup_min + static_cast<Count>(b);
        double const c1 = scenario.cost.backup_action_cost(static_cast<double>(backup));
        std::vector<double> q1(networks, 0.0);
        double censored = 0.0;
        for (std::size_t t = 0; t < n_trials; ++t)
        {
            double x = 0.0;
            for (std::size_t l = 0; l < networks; ++l)
            {
                auto const& cell = cells[t][l];
                bool const burst = cell.burst_by_backup[b] != 0;
                double const v = scenario.cost.network_value(l);
                double const p = out.baselines[l].p_prev_below;
                q1[l] += burst ? 1.0 : 0.0;
                censored += (!burst && !cell.honest_exits) ? 1.0 : 0.0;
                // Per-trial term whose mean is the plug-in total cost.
                x += (c1 + v * (burst ? 1.0 : 0.0)) * p + v * (cell.burst0 ? 1.0 : 0.0) * (1.0 - p);
            }
            per_trial[t] = x;
        }
        double cost = 0.0;
        double mean_q1 = 0.0;
        for (std::size_t l = 0; l < networks; ++l)
        {
            q1[l] /= static_cast<double>(n_trials);
            mean_q1 += q1[l];
            cost += layer1_total_cost(scenario.cost, l, backup, out.baselines[l].q0, q1[l],
                                      out.baselines[l].p_prev_below);
        }
        auto const est = summarize(per_trial);
        out.curve.points.push_back(
            {static_cast<double>(backup), cost, est.std_error,
             mean_q1 / static_cast<double>(networks),
             censored / static_cast<double>(n_trials * networks)});
    }

    if (keep_bursts)
    {
        out.bursts.resize(n_trials);
        for (std::size_t t = 0; t < n_trials; ++t)
        {
            for (auto const& cell : cells[t])
            {
                out.bursts[t].push_back(cell.burst_by_backup);
            }
        }
    }
    return out;
}

struct BackupOptimum
{
    Count best_backup = 0;
    CostCurve curve;
    double baseline_cost = 0.0;
    /// 1 - cost(B*) / cost(no safety mode).
    double efficiency = 0.0;
    std::vector<NetworkBaseline> baselines;

    bool interior(Count lo, Count hi) const { return best_backup > lo && best_backup < hi; }
};

inline BackupOptimum optimize_backup(Scenario const& scenario, Count backup_min, Count backup_max,
                                     std::size_t n_trials, std::uint64_t seed,
                                     std::size_t workers = 1)
{
    auto sweep = sweep_backup(scenario, backup_min, backup_max, n_trials, seed, workers);
    BackupOptimum out;
    auto const best = argmin_first(sweep.curve.points);
    out.best_backup = backup_min + static_cast<Count>(best);
    out.baseline_cost = sweep.baseline_cost;
    out.efficiency = sweep.baseline_cost > 0.0
                         ? 1.0 - sweep.curve.points[best].cost / sweep.baseline_cost
                         : 0.0;
    out.curve = std::move(sweep.curve);
    out.baselines = std::move(sweep.baselines);
    return out;
}

/*!
 * Subordinate-layer cost with the reserve drawn per trial and network from
 * Binomial(eta, rho1): sum over the eta + 1 networks of E[total cost].
 */
struct RandomBackupCost
{
    double cost = 0.0;
    double std_error = 0.0;
    double mean_q1 = 0.0;
    double censor_rate = 0.0;
    double mean_backup = 0.0;
};

inline RandomBackupCost layer1_random_backup_cost(Scenario const& scenario, double rho1,
                                                  std::size_t n_trials, std::uint64_t seed,
                                                  std::size_t workers = 1)
{
    scenario.validate();
    auto const& nets = scenario.layer1;
    std::size_t const networks = nets.size();
    Count const eta = scenario.eta();
    BackupAllocation{eta, rho1}.validate();

    std::vector<ObservationSchedule> schedules;
    for (auto const& net : nets)
    {
        schedules.push_back(net.schedule());
    }
    struct Cell
    {
        bool burst0, burst1, prev_below, censored;
        Count backup;
    };
    std::vector<std::vector<Cell>> cells(n_trials, std::vector<Cell>(networks));
    parallel_for(n_trials, workers, [&](std::size_t t) {
        for (std::size_t l = 0; l < networks; ++l)
        {
            auto [base, attacker] = detail::layer1_race(nets[l], schedules[l], seed, t, l);
            auto supply_rng = substream(seed, StreamPurpose::backup_supply, t, l);
            Count const backup = sample_backup(eta, rho1, supply_rng);
            bool const burst = burst_with_backup(base, attacker, nets[l].attacker_bar(), backup);
            cells[t][l] = {base.burst, burst, base.prev_below_bar(),
                           !burst && !base.mu.has_value(), backup};
        }
    });

    std::vector<double> p(networks, 0.0);
    for (auto const& trial : cells)
    {
        for (std::size_t l = 0; l < networks; ++l)
        {
            p[l] += trial[l].prev_below ? 1.0 : 0.0;
        }
    }
    for (auto& x : p)
    {
        x /= static_cast<double>(n_trials);
    }

    RandomBackupCost out;
    std::vector<double> per_trial(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t)
    {
        double x = 0.0;
        for (std::size_t l = 0; l < networks; ++l)
        {
            auto const& c = cells[t][l];
            double const v = scenario.cost.network_value(l);
            double const c1 = scenario.cost.backup_action_cost(static_cast<double>(c.backup));
            x += (c1 + v * (c.burst1 ? 1.0 : 0.0)) * p[l] + v * (c.burst0 ? 1.0 : 0.0) * (1.0 - p[l]);
            out.mean_q1 += c.burst1 ? 1.0 : 0.0;
            out.censor_rate += c.censored ? 1.0 : 0.0;
            out.mean_backup += static_cast<double>(c.backup);
        }
        per_trial[t] = x;
    }
    auto const est = summarize(per_trial);
    auto const cells_total = static_cast<double>(n_trials * networks);
    out.cost = est.mean;
    out.std_error = est.std_error;
    out.mean_q1 /= cells_total;
    out.censor_rate /= cells_total;
    out.mean_backup /= cells_total;
    return out;
}

//---------------------------------------------------------------------------//
// Supervising layer
//---------------------------------------------------------------------------//

struct AlphaSweep
{
    CostCurve curve;
    double r0 = 0.0;
    double p_prev_below = 0.0;
    std::vector<double> no_action_cost;
    std::vector<double> action_cost;
    /// burst[t][a] for monotonicity checks.
    std::vector<std::vector<char>> bursts;
};

inline void require_ascending_grid(std::span<double const> grid)
{
    if (grid.empty())
    {
        throw ParameterError("empty alpha grid");
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
        {
            throw ParameterError("alpha grid must be nonnegative and strictly ascending");
        }
    }
}

/*!
 * Coupled sweep of the supervising layer over alliance overheads.
 *
 * `rho1` parameterizes the alliance supply for the binomial-bar variant and
 * is ignored by the threshold-scaled one.
 */
inline AlphaSweep sweep_alpha(Scenario const& scenario, std::span<double const> alpha_grid,
                              double rho1, std::size_t n_trials, std::uint64_t seed,
                              std::size_t workers = 1, bool keep_bursts = false)
{
    require_ascending_grid(alpha_grid);
    if (n_trials < 1)
    {
        throw ParameterError("n_trials must be at least 1");
    }
    auto const& cfg = scenario.layer0;
    cfg.validate();
    scenario.cost.validate();
    auto const race = cfg.as_race();
    auto const schedule = cfg.schedule();
    auto const bar = cfg.corrupt_bar();
    std::size_t const grid = alpha_grid.size();
    std::vector<Count> raises;
    for (double const a : alpha_grid)
    {
        raises.push_back(alliance_raise(cfg, a));
    }

    struct Cell
    {
        bool burst0 = false;
        bool prev_below = false;
        bool honest_exits = false;
        std::vector<char> burst;
    };
    std::vector<Cell> cells(n_trials);
    parallel_for(n_trials, workers, [&](std::size_t t) {
        auto rng = substream(seed, StreamPurpose::layer0_path, t);
        auto const path = generate_path(race, schedule, rng);
        auto const base = adjudicate(path, schedule, bar, cfg.genuine_bar());
        auto& cell = cells[t];
        cell.burst0 = base.burst;
        cell.prev_below = base.prev_below_bar();
        cell.honest_exits = base.mu.has_value();
        cell.burst.resize(grid);
        if (cfg.r1_variant == R1Variant::binomial_bar)
        {
            auto supply_rng = substream(seed, StreamPurpose::alliance_supply, t);
            Count const draw = sample_backup(cfg.eta, rho1, supply_rng);
            bool const b = base.burst && base.attacker_at.value_or(0) >= draw;
            std::fill(cell.burst.begin(), cell.burst.end(), static_cast<char>(b));
        }
        else
        {
            for (std::size_t a = 0; a < grid; ++a)
            {
                cell.burst[a] = burst_with_backup(base, path.attacker, bar, raises[a]);
            }
        }
    });

    AlphaSweep out;
    auto const n = static_cast<double>(n_trials);
    for (auto const& c : cells)
    {
        out.r0 += c.burst0 ? 1.0 : 0.0;
        out.p_prev_below += c.prev_below ? 1.0 : 0.0;
    }
    out.r0 /= n;
    out.p_prev_below /= n;

    double const u0 = scenario.cost.layer0_value;
    double const p = out.p_prev_below;
    std::vector<double> per_trial(n_trials);
    for (std::size_t a = 0; a < grid; ++a)
    {
        double const alpha = alpha_grid[a];
        double const c0 = scenario.cost.alliance_action_cost(alpha, cfg.eta);
        double r1 = 0.0;
        double censored = 0.0;
        for (std::size_t t = 0; t < n_trials; ++t)
        {
            bool const burst = cells[t].burst[a] != 0;
            r1 += burst ? 1.0 : 0.0;
            censored += (!burst && !cells[t].honest_exits) ? 1.0 : 0.0;
            per_trial[t] = (c0 + u0 * (burst ? 1.0 : 0.0)) * p
                           + u0 * (cells[t].burst0 ? 1.0 : 0.0) * (1.0 - p);
        }
        r1 /= n;
        auto const est = summarize(per_trial);
        out.curve.points.push_back({alpha, layer0_total_cost(scenario.cost, alpha, cfg.eta, out.r0, r1, p),
                                    est.std_error, r1, censored / n});
        out.no_action_cost.push_back(layer0_no_action_cost(scenario.cost, out.r0));
        out.action_cost.push_back(layer0_action_cost(scenario.cost, alpha, cfg.eta, r1));
    }
    if (keep_bursts)
    {
        for (auto& c : cells)
        {
            out.bursts.push_back(std::move(c.burst));
        }
    }
    return out;
}

struct AlphaOptimum
{
    /// Smallest grid alpha whose Action cost does not exceed the DoNothing
    /// cost; empty when no grid point qualifies.
    std::optional<double> alpha0;
    double alpha_star = 0.0;
    double rho1 = 0.0;
    CostCurve curve;
    double r0 = 0.0;
    double p_prev_below = 0.0;
};

/// alpha* = min(rho1, alpha0); falls back to rho1 when alpha0 does not exist.
inline double compose_alpha_star(double rho1, std::optional<double> alpha0)
{
    return alpha0 ? std::min(rho1, *alpha0) : rho1;
}

inline AlphaOptimum optimize_alpha(Scenario const& scenario, std::span<double const> alpha_grid,
                                   double rho1, std::size_t n_trials, std::uint64_t seed,
                                   std::size_t workers = 1)
{
    if (!(rho1 >= 0.0 && rho1 <= 1.0))
    {
        throw ParameterError("rho1 must lie in [0, 1]");
    }
    auto sweep = sweep_alpha(scenario, alpha_grid, rho1, n_trials, seed, workers);
    AlphaOptimum out;
    for (std::size_t a = 0; a < alpha_grid.size(); ++a)
    {
        if (sweep.no_action_cost[a] >= sweep.action_cost[a])
        {
            out.alpha0 = alpha_grid[a];
            break;
        }
    }
    out.rho1 = rho1;
    out.alpha_star = compose_alpha_star(rho1, out.alpha0);
    out.curve = std::move(sweep.curve);
    out.r0 = sweep.r0;
    out.p_prev_below = sweep.p_prev_below;
    return out;
}

//---------------------------------------------------------------------------//
// Layer sizing
//---------------------------------------------------------------------------//

struct EtaOptimum
{
    Count eta1 = 0;
    Count eta0 = 0;
    Count eta_star = 0;
    CostCurve layer1_curve;
    CostCurve layer0_curve;
    std::vector<double> rho1;
};

/*!
 * Layer sizing over `eta_values` (strictly ascending).
 *
 * eta1 minimizes the subordinate cost summed over eta + 1 networks with
 * reserves drawn from Binomial(eta, rho1(eta)); eta0 minimizes the
 * supervising total cost at the scenario's alpha with eta nodes;
 * eta* = min(eta1, eta0).
 */
inline EtaOptimum optimize_eta(Scenario const& scenario, std::span<Count const> eta_values,
                               std::size_t n_trials, std::uint64_t seed, std::size_t workers = 1)
{
    if (eta_values.empty())
    {
        throw ParameterError("empty eta range");
    }
    EtaOptimum out;
    for (std::size_t i = 0; i < eta_values.size(); ++i)
    {
        Count const eta = eta_values[i];
        if (eta < 1 || (i > 0 && eta <= eta_values[i - 1]))
        {
            throw ParameterError("eta range must be positive and strictly ascending");
        }
        auto sized = scenario.with_layer1_size(eta);
        sized.layer0.eta = eta;
        double const rho1 = estimate_scenario_rho1(sized.layer1, n_trials, seed, workers);
        out.rho1.push_back(rho1);

        auto const l1 = layer1_random_backup_cost(sized, rho1, n_trials, seed, workers);
        out.layer1_curve.points.push_back(
            {static_cast<double>(eta), l1.cost, l1.std_error, l1.mean_q1, l1.censor_rate});

        double const alpha = sized.layer0.alpha;
        auto const l0 = sweep_alpha(sized, std::span<double const>(&alpha, 1), rho1, n_trials,
                                    seed, workers);
        out.layer0_curve.points.push_back(
            {static_cast<double>(eta), l0.curve.points[0].cost, l0.curve.points[0].std_error,
             l0.curve.points[0].burst_rate, l0.curve.points[0].censor_rate});
    }
    out.eta1 = eta_values[argmin_first(out.layer1_curve.points)];
    out.eta0 = eta_values[argmin_first(out.layer0_curve.points)];
    out.eta_star = std::min(out.eta1, out.eta0);
    return out;
}

} // namespace mlbgg
