#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "exit_game.hpp"
#include "layer1.hpp"
#include "rng.hpp"
#include "stochastic_kernel.hpp"
#include "summary.hpp"

namespace mlbgg
{

/*!
 * Which Action bursting rate the supervising layer uses.
 *
 * `threshold_scaled`: the corrupted side must reach ceil(eta(1+alpha)/2).
 * `binomial_bar`: burst iff the unassisted race is lost and C_nu >= B_eta
 * with B_eta ~ Binomial(eta, rho1); this rate does not depend on alpha.
 */
enum class R1Variant
{
    threshold_scaled,
    binomial_bar,
};

inline std::string_view to_string(R1Variant v)
{
    return v == R1Variant::threshold_scaled ? "threshold-scaled" : "binomial-bar";
}

inline R1Variant parse_r1_variant(std::string_view text)
{
    if (text == "threshold-scaled")
    {
        return R1Variant::threshold_scaled;
    }
    if (text == "binomial-bar")
    {
        return R1Variant::binomial_bar;
    }
    throw ParameterError("unknown r1 variant '" + std::string(text) + "'");
}

/// The supervising (strategic-alliance) network.
struct Layer0Config
{
    Count eta = 40;
    double lambda_corrupt = 1.0;
    double lambda_genuine = 1.0;
    MarkDistribution corrupt_marks;
    MarkDistribution genuine_marks;
    Count initial_corrupt = 0;
    Count initial_genuine = 0;
    double delta = 1.0;
    std::optional<double> tau0;
    std::optional<std::size_t> max_epochs;
    double alpha = 0.0;
    ThresholdRule rule = ThresholdRule::paper_geq_half;
    R1Variant r1_variant = R1Variant::threshold_scaled;
    /// Alliance supply law; required by the binomial-bar variant.
    std::optional<BackupAllocation> supply;

    friend bool operator==(Layer0Config const&, Layer0Config const&) = default;

    void validate() const
    {
        if (eta < 1)
        {
            throw ParameterError("layer-0 node count must be positive");
        }
        if (!(lambda_corrupt > 0.0) || !(lambda_genuine > 0.0))
        {
            throw ParameterError("layer-0 intensities must be positive");
        }
        if (initial_corrupt < 0 || initial_genuine < 0)
        {
            throw ParameterError("layer-0 initial states must be nonnegative");
        }
        if (!(delta > 0.0))
        {
            throw ParameterError("layer-0 observation spacing must be positive");
        }
        if (tau0 && !(*tau0 > 0.0))
        {
            throw ParameterError("first observation epoch must be positive");
        }
        if (max_epochs && *max_epochs < 1)
        {
            throw ParameterError("max_epochs must be at least 1");
        }
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
        {
            throw ParameterError("alliance overhead alpha must be nonnegative");
        }
        if (supply)
        {
            supply->validate();
        }
        corrupt_marks.validate();
        genuine_marks.validate();
    }

    Threshold corrupt_bar() const { return Threshold::of(eta, rule); }
    Threshold genuine_bar() const { return Threshold::of(eta, rule); }

    /// Action bar: half of eta(1 + alpha), rounded by the threshold rule.
    Count action_bar(double overhead) const
    {
        return half_count(static_cast<double>(eta) * (1.0 + overhead), rule);
    }
    Count action_bar() const { return action_bar(alpha); }

    double first_epoch() const { return tau0.value_or(delta); }

    std::size_t epoch_count() const
    {
        return max_epochs.value_or(default_epoch_count(
            corrupt_bar().value, std::max(lambda_corrupt, lambda_genuine), delta));
    }

    ObservationSchedule schedule() const
    {
        return observation_epochs(first_epoch(), delta, epoch_count());
    }

    /// Corrupted = attacker side, genuine = honest side of a GamePath.
    Layer1NetworkConfig as_race() const
    {
        Layer1NetworkConfig race;
        race.nodes = eta;
        race.lambda_attacker = lambda_corrupt;
        race.lambda_honest = lambda_genuine;
        race.attacker_marks = corrupt_marks;
        race.honest_marks = genuine_marks;
        race.initial_attacker = initial_corrupt;
        race.initial_honest = initial_genuine;
        race.delta = delta;
        race.tau0 = tau0;
        race.max_epochs = epoch_count();
        race.rule = rule;
        return race;
    }
};

struct Layer0TrialRecord
{
    ExitOutcome outcome;
    Strategy strategy = Strategy::do_nothing;
    /// Time of the unassisted exit epoch t_nu; empty when censored.
    std::optional<double> t_nu;
    /// Realized B_eta (binomial-bar variant under Action only).
    std::optional<Count> supply_draw;
    bool burst = false;
};

/// Raise in the corrupted side's bar implied by overhead `alpha`.
inline Count alliance_raise(Layer0Config const& cfg, double alpha)
{
    return std::max<Count>(0, cfg.action_bar(alpha) - cfg.corrupt_bar().value);
}

namespace detail
{

template<class Generator>
Layer0TrialRecord adjudicate_layer0(Layer0Config const& cfg, GamePath const& path,
                                    ObservationSchedule const& schedule, Strategy strategy,
                                    Generator& rng)
{
    Layer0TrialRecord rec;
    rec.strategy = strategy;
    auto const corrupt_bar = cfg.corrupt_bar();
    auto const genuine_bar = cfg.genuine_bar();

    if (strategy == Strategy::action && cfg.r1_variant == R1Variant::threshold_scaled)
    {
        rec.outcome =
            adjudicate(path, schedule, corrupt_bar, genuine_bar, alliance_raise(cfg, cfg.alpha));
        rec.burst = rec.outcome.burst;
    }
    else
    {
        rec.outcome = adjudicate(path, schedule, corrupt_bar, genuine_bar);
        rec.burst = rec.outcome.burst;
        if (strategy == Strategy::action)
        {
            if (!cfg.supply)
            {
                throw ParameterError("binomial-bar variant requires an alliance supply law");
            }
            Count const draw = sample_backup(cfg.supply->eta, cfg.supply->rho1, rng);
            rec.supply_draw = draw;
            rec.burst = rec.burst && rec.outcome.attacker_at.value_or(0) >= draw;
        }
    }
    rec.t_nu = rec.outcome.tau_at;
    return rec;
}

} // namespace detail

/*!
 * One race on the supervising network.
 *
 * DoNothing bursts when the corrupted side reaches ceil(eta/2) first.
 * Action (threshold-scaled) raises that bar to ceil(eta(1+alpha)/2) from
 * the decision epoch onward. Same generator state gives the same path for
 * both strategies and every alpha.
 */
template<class Generator>
Layer0TrialRecord simulate_layer0(Layer0Config const& cfg, Strategy strategy, Generator& rng)
{
    cfg.validate();
    auto const race = cfg.as_race();
    auto const schedule = cfg.schedule();
    auto const path = generate_path(race, schedule, rng);
    return detail::adjudicate_layer0(cfg, path, schedule, strategy, rng);
}

inline RateEstimate bursting_probability_layer0(Layer0Config const& cfg, Strategy strategy,
                                                std::size_t n_trials, std::uint64_t seed)
{
    if (n_trials < 1)
    {
        throw ParameterError("n_trials must be at least 1");
    }
    cfg.validate();
    std::vector<double> bursts(n_trials);
    std::size_t censored = 0;
    for (std::size_t t = 0; t < n_trials; ++t)
    {
        auto rng = substream(seed, StreamPurpose::layer0_path, t);
        auto const rec = simulate_layer0(cfg, strategy, rng);
        bursts[t] = rec.burst ? 1.0 : 0.0;
        censored += rec.outcome.winner == Winner::censored ? 1 : 0;
    }
    return {summarize(bursts), static_cast<double>(censored) / static_cast<double>(n_trials)};
}

/// Poisson(mean) probability mass at k, computed in log space.
inline double poisson_pmf(Count k, double mean)
{
    if (k < 0)
    {
        return 0.0;
    }
    if (mean == 0.0)
    {
        return k == 0 ? 1.0 : 0.0;
    }
    auto const kd = static_cast<double>(k);
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

/*!
 * Mixed-Poisson estimate of P{C_nu = k}: the sample average over exit times
 * t of the Poisson(lambda_c * t) mass at k.
 */
inline double compound_poisson_pmf(Count k, double lambda_c, std::span<double const> t_nu_samples)
{
    if (k < 0)
    {
        throw ParameterError("compound_poisson_pmf: negative k");
    }
    if (!(lambda_c > 0.0))
    {
        throw ParameterError("compound_poisson_pmf: intensity must be positive");
    }
    if (t_nu_samples.empty())
    {
        throw ParameterError("compound_poisson_pmf: no exit-time samples");
    }
    double sum = 0.0;
    for (double const t : t_nu_samples)
    {
        if (!(t > 0.0))
        {
            throw ParameterError("compound_poisson_pmf: exit times must be positive");
        }
        sum += poisson_pmf(k, lambda_c * t);
    }
    return sum / static_cast<double>(t_nu_samples.size());
}

namespace detail
{

inline std::size_t count_eligible(std::span<Layer0TrialRecord const> trials)
{
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](auto const& r) {
        return r.outcome.attacker_prev.has_value();
    }));
}

} // namespace detail

/// Empirical PMF of C_{nu-1} over trials with nu >= 1.
inline double pmf_c_prev(std::span<Layer0TrialRecord const> trials, Count k)
{
    auto const eligible = detail::count_eligible(trials);
    if (eligible == 0)
    {
        throw ParameterError("pmf_c_prev: no trial with a decision epoch");
    }
    auto const hits = std::count_if(trials.begin(), trials.end(), [k](auto const& r) {
        return r.outcome.attacker_prev == k;
    });
    return static_cast<double>(hits) / static_cast<double>(eligible);
}

/// Direct estimate of P{C_{nu-1} < bar} over trials with nu >= 1.
inline double prob_c_prev_below(std::span<Layer0TrialRecord const> trials, Count bar)
{
    auto const eligible = detail::count_eligible(trials);
    if (eligible == 0)
    {
        throw ParameterError("prob_c_prev_below: no trial with a decision epoch");
    }
    auto const hits = std::count_if(trials.begin(), trials.end(), [bar](auto const& r) {
        return r.outcome.attacker_prev && *r.outcome.attacker_prev < bar;
    });
    return static_cast<double>(hits) / static_cast<double>(eligible);
}

} // namespace mlbgg
