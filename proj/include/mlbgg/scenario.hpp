#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cost.hpp"
#include "errors.hpp"
#include "layer0.hpp"
#include "layer1.hpp"

namespace mlbgg
{

/// Everything a run needs: the eta + 1 subordinate networks, the
/// supervising network, costs, trial count and root seed.
struct Scenario
{
    std::vector<Layer1NetworkConfig> layer1;
    Layer0Config layer0;
    CostParams cost;
    std::size_t n_trials = 1000;
    std::uint64_t seed = 0;

    friend bool operator==(Scenario const&, Scenario const&) = default;

    /// eta: the subordinate layer has eta + 1 networks.
    Count eta() const { return static_cast<Count>(layer1.size()) - 1; }

    void validate() const
    {
        if (layer1.size() < 2)
        {
            throw ParameterError("the subordinate layer needs at least two networks (eta >= 1)");
        }
        if (n_trials < 1)
        {
            throw ParameterError("n_trials must be at least 1");
        }
        for (auto const& net : layer1)
        {
            net.validate();
            // Proof-of-work duration is shared within a layer.
            if (net.delta != layer1.front().delta
                || net.first_epoch() != layer1.front().first_epoch())
            {
                throw ParameterError("all subordinate networks must share delta and tau0");
            }
        }
        layer0.validate();
        cost.validate();
        if (cost.network_values.size() != 1 && cost.network_values.size() != layer1.size())
        {
            throw ParameterError("network_values must have 1 or eta + 1 entries");
        }
    }

    /// Same scenario with `eta + 1` subordinate networks, cycling the
    /// configured ones (and their values) as templates.
    Scenario with_layer1_size(Count eta) const
    {
        if (eta < 1)
        {
            throw ParameterError("eta must be at least 1");
        }
        Scenario out = *this;
        out.layer1.clear();
        std::vector<double> values;
        for (Count l = 0; l <= eta; ++l)
        {
            auto const src = static_cast<std::size_t>(l) % layer1.size();
            out.layer1.push_back(layer1[src]);
            values.push_back(cost.network_value(src));
        }
        if (cost.network_values.size() != 1)
        {
            out.cost.network_values = std::move(values);
        }
        return out;
    }
};

} // namespace mlbgg
