#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace mlbgg
{

/// Node counts (captures, thresholds, backups).
using Count = std::int64_t;

enum class MarkKind
{
    unit,
    poisson,
    geometric,
};

/*!
 * Law of the number of nodes taken by one capture event.
 *
 * `poisson` has support {0, 1, ...} with the given mean; `geometric` counts
 * trials up to and including the first success, support {1, 2, ...}, so
 * p = 1 degenerates to unit marks.
 */
struct MarkDistribution
{
    MarkKind kind = MarkKind::unit;
    double parameter = 1.0;

    static MarkDistribution unit() { return {}; }
    static MarkDistribution poisson(double mean)
    {
        return {MarkKind::poisson, mean};
    }
    static MarkDistribution geometric(double p)
    {
        return {MarkKind::geometric, p};
    }

    void validate() const
    {
        switch (kind)
        {
            case MarkKind::unit:
                return;
            case MarkKind::poisson:
                if (!(parameter > 0.0) || !std::isfinite(parameter))
                {
                    throw ParameterError("poisson mark mean must be positive");
                }
                return;
            case MarkKind::geometric:
                if (!(parameter > 0.0 && parameter <= 1.0))
                {
                    throw ParameterError("geometric mark p must lie in (0, 1]");
                }
                return;
        }
    }

    template<class Generator>
    Count operator()(Generator& rng) const
    {
        switch (kind)
        {
            case MarkKind::unit:
                return 1;
            case MarkKind::poisson:
                return std::poisson_distribution<Count>(parameter)(rng);
            case MarkKind::geometric:
                return std::geometric_distribution<Count>(parameter)(rng) + 1;
        }
        return 1;
    }

    friend bool operator==(MarkDistribution const&, MarkDistribution const&) = default;
};

struct MarkedEvent
{
    double time;
    Count mark;

    friend bool operator==(MarkedEvent const&, MarkedEvent const&) = default;
};

/// Time-sorted events of one marked Poisson source on (0, horizon].
struct MarkedEventStream
{
    std::vector<MarkedEvent> events;
    double intensity = 1.0;
    double horizon = 0.0;

    Count total_mark() const noexcept
    {
        Count total = 0;
        for (auto const& e : events)
        {
            total += e.mark;
        }
        return total;
    }
};

template<class Generator>
MarkedEventStream sample_marked_poisson(double intensity, MarkDistribution const& marks,
                                        double horizon, Generator& rng)
{
    if (!(intensity > 0.0) || !std::isfinite(intensity))
    {
        throw ParameterError("event intensity must be positive and finite");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon))
    {
        throw ParameterError("stream horizon must be positive and finite");
    }
    marks.validate();

    MarkedEventStream out{{}, intensity, horizon};
    out.events.reserve(static_cast<std::size_t>(intensity * horizon * 1.1) + 8);
    double t = 0.0;
    while (true)
    {
        t += sample_exponential(rng, intensity);
        if (t > horizon)
        {
            break;
        }
        out.events.push_back({t, marks(rng)});
    }
    return out;
}

/// Proof-of-work completion instants tau_k = tau0 + k * spacing.
struct ObservationSchedule
{
    std::vector<double> epochs;
    double tau0 = 0.0;
    double spacing = 0.0;

    std::size_t size() const noexcept { return epochs.size(); }
    double operator[](std::size_t k) const { return epochs[k]; }
    double last() const { return epochs.back(); }
};

inline ObservationSchedule observation_epochs(double tau0, double delta, std::size_t count)
{
    if (!(tau0 > 0.0) || !std::isfinite(tau0))
    {
        throw ParameterError("first observation epoch must be positive");
    }
    if (!(delta > 0.0) || !std::isfinite(delta))
    {
        throw ParameterError("observation spacing must be positive");
    }
    if (count < 1)
    {
        throw ParameterError("observation schedule needs at least one epoch");
    }
    ObservationSchedule out{{}, tau0, delta};
    out.epochs.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        out.epochs.push_back(tau0 + static_cast<double>(k) * delta);
    }
    return out;
}

/// Cumulative attacker/honest captures sampled at each observation epoch.
struct GamePath
{
    std::vector<Count> attacker;
    std::vector<Count> honest;

    std::size_t size() const noexcept { return attacker.size(); }
};

/// Initial value plus the marks of all events with time <= each epoch.
inline std::vector<Count> accumulate_stream(MarkedEventStream const& stream,
                                            ObservationSchedule const& schedule,
                                            Count initial)
{
    if (schedule.size() == 0)
    {
        throw DimensionError("empty observation schedule");
    }
    if (stream.horizon < schedule.last())
    {
        throw ParameterError("stream horizon " + std::to_string(stream.horizon)
                             + " does not cover last epoch "
                             + std::to_string(schedule.last()));
    }
    std::vector<Count> out;
    out.reserve(schedule.size());
    Count running = initial;
    std::size_t next = 0;
    for (double const epoch : schedule.epochs)
    {
        while (next < stream.events.size() && stream.events[next].time <= epoch)
        {
            running += stream.events[next].mark;
            ++next;
        }
        out.push_back(running);
    }
    return out;
}

inline GamePath accumulate_on_epochs(MarkedEventStream const& attacker,
                                     MarkedEventStream const& honest,
                                     ObservationSchedule const& schedule,
                                     Count initial_attacker, Count initial_honest)
{
    if (initial_attacker < 0 || initial_honest < 0)
    {
        throw ParameterError("initial capture counts must be nonnegative");
    }
    return {accumulate_stream(attacker, schedule, initial_attacker),
            accumulate_stream(honest, schedule, initial_honest)};
}

} // namespace mlbgg
