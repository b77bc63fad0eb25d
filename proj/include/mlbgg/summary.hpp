#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "errors.hpp"

namespace mlbgg
{

/// Sample mean with normal-approximation 95% interval.
struct Estimate
{
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t count = 0;
    /// Fewer than two samples: the interval carries no information.
    bool degenerate = true;

    bool contains(double x) const noexcept { return ci_low <= x && x <= ci_high; }
};

inline constexpr double z95 = 1.959963984540054;

inline Estimate summarize(std::span<double const> samples)
{
    if (samples.empty())
    {
        throw ParameterError("summarize: no samples");
    }
    auto const n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double const x : samples)
    {
        sum += x;
    }
    double const mean = sum / n;
    double ss = 0.0;
    for (double const x : samples)
    {
        ss += (x - mean) * (x - mean);
    }
    Estimate out;
    out.mean = mean;
    out.count = samples.size();
    out.degenerate = samples.size() < 2;
    out.std_error = out.degenerate ? 0.0 : std::sqrt(ss / (n - 1.0) / n);
    out.ci_low = mean - z95 * out.std_error;
    out.ci_high = mean + z95 * out.std_error;
    // A zero-width interval must still contain its own point estimate.
    if (out.std_error == 0.0)
    {
        out.ci_low = out.ci_high = mean;
    }
    return out;
}

/// Bursting-rate estimate: burst indicators over all trials, censored
/// trials included in the denominator.
struct RateEstimate
{
    Estimate rate;
    double censor_rate = 0.0;
};

} // namespace mlbgg
