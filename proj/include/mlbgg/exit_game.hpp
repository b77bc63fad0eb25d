#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "stochastic_kernel.hpp"

namespace mlbgg
{

/*!
 * How "half of the nodes" becomes an integer capture count.
 *
 * `paper_geq_half` is the smallest count c with c >= M/2, i.e. ceil(M/2);
 * `strict_majority` is floor(M/2) + 1. They agree for odd M.
 */
enum class ThresholdRule
{
    paper_geq_half,
    strict_majority,
};

inline std::string_view to_string(ThresholdRule rule)
{
    return rule == ThresholdRule::paper_geq_half ? "paper-geq-half" : "strict-majority";
}

inline ThresholdRule parse_threshold_rule(std::string_view text)
{
    if (text == "paper-geq-half")
    {
        return ThresholdRule::paper_geq_half;
    }
    if (text == "strict-majority")
    {
        return ThresholdRule::strict_majority;
    }
    throw ParameterError("unknown threshold rule '" + std::string(text) + "'");
}

/// Integer bar for "at least half of `scaled_total`" under `rule`.
/// The tolerance absorbs representation error in products like 20 * 1.1.
inline Count half_count(double scaled_total, ThresholdRule rule)
{
    constexpr double tol = 1e-9;
    double const half = scaled_total / 2.0;
    if (rule == ThresholdRule::paper_geq_half)
    {
        return static_cast<Count>(std::ceil(half - tol));
    }
    return static_cast<Count>(std::floor(half + tol)) + 1;
}

struct Threshold
{
    Count total_nodes = 1;
    ThresholdRule rule = ThresholdRule::paper_geq_half;
    Count value = 1;

    static Threshold of(Count total_nodes, ThresholdRule rule = ThresholdRule::paper_geq_half)
    {
        if (total_nodes < 1)
        {
            throw ParameterError("total node count must be positive");
        }
        Count const value =
            std::clamp<Count>(half_count(static_cast<double>(total_nodes), rule), 1, total_nodes);
        return {total_nodes, rule, value};
    }
};

/// Exit index: epoch position in the schedule, or nullopt when censored.
using ExitIndex = std::optional<std::size_t>;

inline void require_nondecreasing(std::span<Count const> path)
{
    for (std::size_t k = 1; k < path.size(); ++k)
    {
        if (path[k] < path[k - 1])
        {
            throw InvariantError("cumulative path decreases at epoch " + std::to_string(k));
        }
    }
}

/// First k with path[k] >= bar; assumes a validated nondecreasing path.
inline ExitIndex first_reaching(std::span<Count const> path, Count bar) noexcept
{
    auto const it = std::lower_bound(path.begin(), path.end(), bar);
    if (it == path.end())
    {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - path.begin());
}

inline ExitIndex exit_index(std::span<Count const> path, Threshold const& threshold)
{
    require_nondecreasing(path);
    return first_reaching(path, threshold.value);
}

/// First j with path[j] - backup >= T, i.e. crossing the raised bar T + backup.
inline ExitIndex exit_index_allied(std::span<Count const> path, Threshold const& threshold,
                                   Count backup)
{
    if (backup < 0)
    {
        throw ParameterError("backup count must be nonnegative");
    }
    require_nondecreasing(path);
    return first_reaching(path, threshold.value + backup);
}

enum class Winner
{
    attacker,
    honest,
    censored,
};

inline std::string_view to_string(Winner w)
{
    switch (w)
    {
        case Winner::attacker:
            return "attacker";
        case Winner::honest:
            return "honest";
        case Winner::censored:
            return "censored";
    }
    return "censored";
}

/// Strict precedence; ties and censoring on the attacker side go to honest.
constexpr bool attacker_precedes(ExitIndex const& attacker, ExitIndex const& honest) noexcept
{
    return attacker.has_value() && (!honest.has_value() || *attacker < *honest);
}

struct ExitOutcome
{
    ExitIndex nu;
    ExitIndex mu;
    ExitIndex nu2;
    Winner winner = Winner::censored;
    bool burst = false;

    // Boundary values at the attacker's unassisted exit nu; the *_prev
    // fields are empty when nu == 0 and everything is empty when censored.
    std::optional<double> tau_prev;
    std::optional<double> tau_at;
    std::optional<Count> attacker_prev;
    std::optional<Count> attacker_at;
    std::optional<Count> honest_prev;
    std::optional<Count> honest_at;

    bool pre_game() const noexcept { return nu.has_value() && *nu == 0; }

    /// The attacker sits strictly below its bar one epoch before exit. True
    /// for censored paths too (the bar was never reached); false when the
    /// network was already compromised at the first epoch.
    bool prev_below_bar() const noexcept { return !pre_game(); }
};

/*!
 * Adjudicate one race on a common schedule.
 *
 * Without `backup` the game ends at min(nu, mu) and the attacker wins iff
 * nu < mu. With `backup` the safety action is taken at the decision epoch
 * tau_{nu-1}, raising the attacker's bar to T + backup; the attacker then
 * wins only if nu2 < mu. When nu == 0 there is no decision epoch and the
 * unassisted rule applies. A censored side never wins.
 */
inline ExitOutcome adjudicate(GamePath const& path, ObservationSchedule const& schedule,
                              Threshold const& attacker_bar, Threshold const& honest_bar,
                              std::optional<Count> backup = std::nullopt)
{
    if (path.attacker.size() != path.honest.size())
    {
        throw DimensionError("attacker and honest paths differ in length");
    }
    if (path.attacker.size() != schedule.size())
    {
        throw DimensionError("path length " + std::to_string(path.attacker.size())
                             + " does not match schedule length "
                             + std::to_string(schedule.size()));
    }

    ExitOutcome out;
    out.nu = exit_index(path.attacker, attacker_bar);
    out.mu = exit_index(path.honest, honest_bar);

    ExitIndex effective = out.nu;
    if (backup)
    {
        out.nu2 = exit_index_allied(path.attacker, attacker_bar, *backup);
        if (!out.pre_game())
        {
            effective = out.nu2;
        }
    }

    if (attacker_precedes(effective, out.mu))
    {
        out.winner = Winner::attacker;
    }
    else if (out.mu.has_value())
    {
        out.winner = Winner::honest;
    }
    else
    {
        out.winner = Winner::censored;
    }
    out.burst = out.winner == Winner::attacker;

    if (out.nu)
    {
        std::size_t const k = *out.nu;
        out.tau_at = schedule[k];
        out.attacker_at = path.attacker[k];
        out.honest_at = path.honest[k];
        if (k >= 1)
        {
            out.tau_prev = schedule[k - 1];
            out.attacker_prev = path.attacker[k - 1];
            out.honest_prev = path.honest[k - 1];
        }
    }
    return out;
}

/*!
 * Burst indicator of `base` (an unassisted outcome on `attacker`) if the
 * safety action had raised the bar by `backup`. Matches
 * adjudicate(..., backup).burst without rescanning the honest path, which
 * is what the coupled sweeps over backup counts need.
 */
inline bool burst_with_backup(ExitOutcome const& base, std::span<Count const> attacker,
                              Threshold const& attacker_bar, Count backup) noexcept
{
    if (base.pre_game())
    {
        return base.burst;
    }
    return attacker_precedes(first_reaching(attacker, attacker_bar.value + backup), base.mu);
}

/*!
 * Decision epoch tau_{nu-1}, read from the schedule.
 *
 * Returns nullopt for the "pre-game" case nu == 0: there is no earlier
 * epoch and the network must be treated as already compromised. Throws for
 * censored outcomes, which have no exit at all.
 */
inline std::optional<double> decision_epoch(ExitOutcome const& outcome,
                                            ObservationSchedule const& schedule)
{
    if (!outcome.nu)
    {
        throw InvariantError("decision epoch requested for a censored trial");
    }
    if (*outcome.nu == 0)
    {
        return std::nullopt;
    }
    return schedule[*outcome.nu - 1];
}

} // namespace mlbgg
