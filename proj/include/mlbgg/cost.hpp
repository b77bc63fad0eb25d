#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "stochastic_kernel.hpp"

namespace mlbgg
{

/*!
 * Values at risk and strategy cost coefficients.
 *
 * The reserve cost is c1(B) = backup_cost * B. The alliance cost is
 * c0(alpha, eta) = alliance_fixed_cost + alliance_cost * alpha * eta; the
 * fixed part prices opening an alliance at all. Replace backup_action_cost()
 * and alliance_action_cost() to try other shapes.
 */
struct CostParams
{
    /// V_l; a single entry applies to every subordinate network.
    std::vector<double> network_values{100.0};
    double layer0_value = 1000.0;
    double backup_cost = 1.0;
    double alliance_cost = 0.0;
    double alliance_fixed_cost = 0.0;

    friend bool operator==(CostParams const&, CostParams const&) = default;

    void validate() const
    {
        if (network_values.empty())
        {
            throw ParameterError("at least one network value is required");
        }
        for (double const v : network_values)
        {
            if (!(v >= 0.0) || !std::isfinite(v))
            {
                throw ParameterError("network values must be nonnegative");
            }
        }
        if (!(layer0_value >= 0.0) || !(backup_cost >= 0.0) || !(alliance_cost >= 0.0)
            || !(alliance_fixed_cost >= 0.0))
        {
            throw ParameterError("cost coefficients must be nonnegative");
        }
    }

    double network_value(std::size_t l) const
    {
        return network_values.size() == 1 ? network_values.front() : network_values.at(l);
    }

    double backup_action_cost(double backup) const { return backup_cost * backup; }

    double alliance_action_cost(double alpha, Count eta) const
    {
        return alliance_fixed_cost + alliance_cost * alpha * static_cast<double>(eta);
    }
};

namespace detail
{

inline void require_probability(double p, char const* name)
{
    if (!(p >= 0.0 && p <= 1.0))
    {
        throw ParameterError(std::string(name) + " must lie in [0, 1]");
    }
}

} // namespace detail

/// Expected Action cost, unsimplified: c1 (1 - q1) + (c1 + V) q1.
inline double action_cost_long(double action_cost, double value, double q1)
{
    return action_cost * (1.0 - q1) + (action_cost + value) * q1;
}

/// Same quantity after collecting terms: c1 + V q1.
inline double action_cost_short(double action_cost, double value, double q1)
{
    return action_cost + value * q1;
}

/*!
 * Per-network total cost for a decision taken at the decision epoch:
 * {c1 + V q1} p + V q0 (1 - p), where p = P{A_{nu-1} below the bar}.
 * `action_cost` is c1(B), or E[c1(B)] when the reserve is random.
 */
inline double layer1_total_cost_from(double action_cost, double value, double q0, double q1,
                                     double p_prev_below)
{
    detail::require_probability(q0, "q0");
    detail::require_probability(q1, "q1");
    detail::require_probability(p_prev_below, "p_prev_below");
    return action_cost_short(action_cost, value, q1) * p_prev_below
           + value * q0 * (1.0 - p_prev_below);
}

inline double layer1_total_cost(CostParams const& params, std::size_t network, Count backup,
                                double q0, double q1, double p_prev_below)
{
    if (backup < 0)
    {
        throw ParameterError("backup count must be nonnegative");
    }
    return layer1_total_cost_from(params.backup_action_cost(static_cast<double>(backup)),
                                  params.network_value(network), q0, q1, p_prev_below);
}

/// Random reserve B ~ Binomial(eta, rho1): the linear reserve cost
/// averages to backup_cost * eta * rho1.
inline double layer1_total_cost(CostParams const& params, std::size_t network, Count eta,
                                double rho1, double q0, double q1, double p_prev_below)
{
    detail::require_probability(rho1, "rho1");
    return layer1_total_cost_from(
        params.backup_action_cost(static_cast<double>(eta) * rho1),
        params.network_value(network), q0, q1, p_prev_below);
}

/// Layer-0 DoNothing cost U0 r0.
inline double layer0_no_action_cost(CostParams const& params, double r0)
{
    detail::require_probability(r0, "r0");
    return params.layer0_value * r0;
}

/// Layer-0 Action cost c0 (1 - r1) + (c0 + U0) r1.
inline double layer0_action_cost(CostParams const& params, double alpha, Count eta, double r1)
{
    detail::require_probability(r1, "r1");
    return action_cost_long(params.alliance_action_cost(alpha, eta), params.layer0_value, r1);
}

/// {c0 (1 - r1) + (c0 + U0) r1} p + U0 r0 (1 - p), p = P{C_{nu-1} below the bar}.
inline double layer0_total_cost(CostParams const& params, double alpha, Count eta, double r0,
                                double r1, double p_prev_below)
{
    if (!(alpha >= 0.0))
    {
        throw ParameterError("alpha must be nonnegative");
    }
    if (eta < 1)
    {
        throw ParameterError("eta must be positive");
    }
    detail::require_probability(p_prev_below, "p_prev_below");
    return layer0_action_cost(params, alpha, eta, r1) * p_prev_below
           + layer0_no_action_cost(params, r0) * (1.0 - p_prev_below);
}

} // namespace mlbgg
