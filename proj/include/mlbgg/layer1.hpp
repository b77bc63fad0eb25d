#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "exit_game.hpp"
#include "rng.hpp"
#include "stochastic_kernel.hpp"
#include "summary.hpp"

namespace mlbgg
{

enum class Strategy
{
    do_nothing,
    action,
};

inline std::string_view to_string(Strategy s)
{
    return s == Strategy::do_nothing ? "do-nothing" : "action";
}

/// Upper bound on the default epoch count, for near-zero intensities.
inline constexpr std::size_t max_default_epochs = 1'000'000;

/// Default schedule length: 10 * ceil(threshold / (lambda * delta)) using the
/// faster side's intensity, so the race resolves with high probability.
inline std::size_t default_epoch_count(Count threshold, double fastest_intensity, double delta)
{
    double const expected = static_cast<double>(threshold) / (fastest_intensity * delta);
    double const epochs = 10.0 * std::ceil(expected);
    return static_cast<std::size_t>(
        std::clamp(epochs, 1.0, static_cast<double>(max_default_epochs)));
}

/// One blockchain network of the subordinate layer.
struct Layer1NetworkConfig
{
    Count nodes = 100;
    double lambda_attacker = 1.0;
    double lambda_honest = 1.0;
    MarkDistribution attacker_marks;
    MarkDistribution honest_marks;
    Count initial_attacker = 0;
    Count initial_honest = 0;
    double delta = 1.0;
    std::optional<double> tau0;
    std::optional<std::size_t> max_epochs;
    ThresholdRule rule = ThresholdRule::paper_geq_half;

    friend bool operator==(Layer1NetworkConfig const&, Layer1NetworkConfig const&) = default;

    void validate() const
    {
        if (nodes < 1)
        {
            throw ParameterError("network node count must be positive");
        }
        if (!(lambda_attacker > 0.0) || !(lambda_honest > 0.0))
        {
            throw ParameterError("capture intensities must be positive");
        }
        if (initial_attacker < 0 || initial_honest < 0
            || initial_attacker + initial_honest > nodes)
        {
            throw ParameterError("initial captures must be nonnegative and sum to at most the "
                                 "node count");
        }
        if (!(delta > 0.0))
        {
            throw ParameterError("proof-of-work spacing must be positive");
        }
        if (tau0 && !(*tau0 > 0.0))
        {
            throw ParameterError("first observation epoch must be positive");
        }
        if (max_epochs && *max_epochs < 1)
        {
            throw ParameterError("max_epochs must be at least 1");
        }
        attacker_marks.validate();
        honest_marks.validate();
    }

    Threshold attacker_bar() const { return Threshold::of(nodes, rule); }
    Threshold honest_bar() const { return Threshold::of(nodes, rule); }

    /// The first proof-of-work completes one full spacing after start.
    double first_epoch() const { return tau0.value_or(delta); }

    std::size_t epoch_count() const
    {
        return max_epochs.value_or(default_epoch_count(
            attacker_bar().value, std::max(lambda_attacker, lambda_honest), delta));
    }

    ObservationSchedule schedule() const
    {
        return observation_epochs(first_epoch(), delta, epoch_count());
    }
};

/// Random reserve supply B ~ Binomial(eta, rho1).
struct BackupAllocation
{
    Count eta = 1;
    double rho1 = 0.0;

    friend bool operator==(BackupAllocation const&, BackupAllocation const&) = default;

    void validate() const
    {
        if (eta < 0)
        {
            throw ParameterError("backup pool size must be nonnegative");
        }
        if (!(rho1 >= 0.0 && rho1 <= 1.0))
        {
            throw ParameterError("rho1 must lie in [0, 1]");
        }
    }
};

template<class Generator>
Count sample_backup(Count eta, double rho1, Generator& rng)
{
    BackupAllocation{eta, rho1}.validate();
    if (rho1 == 0.0 || eta == 0)
    {
        return 0;
    }
    if (rho1 == 1.0)
    {
        return eta;
    }
    return std::binomial_distribution<Count>(eta, rho1)(rng);
}

struct Layer1TrialRecord
{
    ExitOutcome outcome;
    Strategy strategy = Strategy::do_nothing;
    Count backup = 0;
    bool honest_won = false;
    bool burst = false;
};

/// Attacker stream first, honest stream second, both drawn from `rng`.
template<class Generator>
GamePath generate_path(Layer1NetworkConfig const& cfg, ObservationSchedule const& schedule,
                       Generator& rng)
{
    double const horizon = schedule.last();
    auto const attacker =
        sample_marked_poisson(cfg.lambda_attacker, cfg.attacker_marks, horizon, rng);
    auto const honest = sample_marked_poisson(cfg.lambda_honest, cfg.honest_marks, horizon, rng);
    return accumulate_on_epochs(attacker, honest, schedule, cfg.initial_attacker,
                                cfg.initial_honest);
}

inline Layer1TrialRecord make_layer1_record(ExitOutcome outcome, Strategy strategy, Count backup)
{
    Layer1TrialRecord rec;
    rec.strategy = strategy;
    rec.backup = backup;
    rec.honest_won = outcome.winner == Winner::honest;
    rec.burst = outcome.burst;
    rec.outcome = std::move(outcome);
    return rec;
}

/*!
 * One 51%-attack race on network `cfg`.
 *
 * Under Action the B backup nodes are released at the decision epoch and
 * the attacker must reach T + B captures before the honest side reaches T.
 * Passing the same generator state for different strategies or backup
 * counts yields the same sample path (common random numbers).
 */
template<class Generator>
Layer1TrialRecord simulate_network(Layer1NetworkConfig const& cfg, Strategy strategy, Count backup,
                                   Generator& rng)
{
    cfg.validate();
    if (backup < 0)
    {
        throw ParameterError("backup count must be nonnegative");
    }
    auto const schedule = cfg.schedule();
    auto const path = generate_path(cfg, schedule, rng);
    auto outcome = adjudicate(path, schedule, cfg.attacker_bar(), cfg.honest_bar(),
                              strategy == Strategy::action ? std::optional<Count>(backup)
                                                           : std::nullopt);
    return make_layer1_record(std::move(outcome), strategy,
                              strategy == Strategy::action ? backup : 0);
}

namespace detail
{

template<class BackupFor>
RateEstimate layer1_rate(Layer1NetworkConfig const& cfg, Strategy strategy, std::size_t n_trials,
                         std::uint64_t seed, std::uint64_t network, BackupFor&& backup_for)
{
    if (n_trials < 1)
    {
        throw ParameterError("n_trials must be at least 1");
    }
    cfg.validate();
    auto const schedule = cfg.schedule();
    auto const attacker_bar = cfg.attacker_bar();
    auto const honest_bar = cfg.honest_bar();

    std::vector<double> bursts(n_trials);
    std::size_t censored = 0;
    for (std::size_t t = 0; t < n_trials; ++t)
    {
        auto rng = substream(seed, StreamPurpose::layer1_path, t, network);
        auto const path = generate_path(cfg, schedule, rng);
        std::optional<Count> backup;
        if (strategy == Strategy::action)
        {
            backup = backup_for(t);
        }
        auto const out = adjudicate(path, schedule, attacker_bar, honest_bar, backup);
        bursts[t] = out.burst ? 1.0 : 0.0;
        censored += out.winner == Winner::censored ? 1 : 0;
    }
    return {summarize(bursts), static_cast<double>(censored) / static_cast<double>(n_trials)};
}

} // namespace detail

/// Monte Carlo bursting probability with a fixed reserve B.
inline RateEstimate bursting_probability(Layer1NetworkConfig const& cfg, Strategy strategy,
                                         Count backup, std::size_t n_trials, std::uint64_t seed,
                                         std::uint64_t network = 0)
{
    if (backup < 0)
    {
        throw ParameterError("backup count must be nonnegative");
    }
    return detail::layer1_rate(cfg, strategy, n_trials, seed, network,
                               [backup](std::size_t) { return backup; });
}

/// Bursting probability with the reserve realized per trial from its
/// Binomial law (averaging the conditional rate over B).
inline RateEstimate bursting_probability(Layer1NetworkConfig const& cfg, Strategy strategy,
                                         BackupAllocation const& supply, std::size_t n_trials,
                                         std::uint64_t seed, std::uint64_t network = 0)
{
    supply.validate();
    return detail::layer1_rate(cfg, strategy, n_trials, seed, network, [&](std::size_t t) {
        auto rng = substream(seed, StreamPurpose::backup_supply, t, network);
        return sample_backup(supply.eta, supply.rho1, rng);
    });
}

/*!
 * Honest-win rate averaged over the eta + 1 networks.
 *
 * `per_network[k]` holds the unassisted trial records of network k; each
 * network contributes its own win fraction with weight 1 / (eta + 1).
 */
inline double estimate_rho1(std::span<std::vector<Layer1TrialRecord> const> per_network)
{
    if (per_network.empty())
    {
        throw ParameterError("estimate_rho1: no networks");
    }
    double total = 0.0;
    for (auto const& records : per_network)
    {
        if (records.empty())
        {
            throw ParameterError("estimate_rho1: network without trial records");
        }
        auto const wins = std::count_if(records.begin(), records.end(),
                                        [](auto const& r) { return r.honest_won; });
        total += static_cast<double>(wins) / static_cast<double>(records.size());
    }
    return total / static_cast<double>(per_network.size());
}

} // namespace mlbgg
