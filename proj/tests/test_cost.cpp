#include <gtest/gtest.h>

#include <mlbgg/cost.hpp>
#include <mlbgg/rng.hpp>

using namespace mlbgg;

TEST(Layer1Cost, ZeroBackupCost)
{
    CostParams p;
    p.network_values = {10.0};
    p.backup_cost = 0.0;
    for (Count b : {0, 3, 40})
    {
        EXPECT_NEAR(layer1_total_cost(p, 0, b, 0.6, 0.2, 0.7), 10.0 * (0.2 * 0.7 + 0.6 * 0.3),
                    1e-12);
    }
}

TEST(Layer1Cost, HandArithmetic)
{
    CostParams p;
    p.network_values = {10.0};
    p.backup_cost = 1.0;
    EXPECT_NEAR(layer1_total_cost(p, 0, 2, 0.9, 0.1, 1.0), 3.0, 1e-12);
}

TEST(Layer1Cost, RandomBackupUsesMeanReserve)
{
    CostParams p;
    p.network_values = {50.0};
    p.backup_cost = 2.0;
    double const expected = (2.0 * 40 * 0.25 + 50.0 * 0.1) * 0.8 + 50.0 * 0.5 * 0.2;
    EXPECT_NEAR(layer1_total_cost(p, 0, Count{40}, 0.25, 0.5, 0.1, 0.8), expected, 1e-12);
}

TEST(Layer1Cost, PerNetworkValues)
{
    CostParams p;
    p.network_values = {1.0, 2.0, 3.0};
    p.backup_cost = 0.0;
    EXPECT_NEAR(layer1_total_cost(p, 2, 0, 1.0, 1.0, 0.5), 3.0, 1e-12);
    EXPECT_THROW(p.network_value(3), std::out_of_range);
}

TEST(Layer1Cost, LongShortIdentity)
{
    Pcg32 rng(31, 1);
    for (int i = 0; i < 1000; ++i)
    {
        double const c1 = 100.0 * uniform_open01(rng);
        double const v = 1000.0 * uniform_open01(rng);
        double const q = uniform_open01(rng);
        ASSERT_NEAR(action_cost_long(c1, v, q), action_cost_short(c1, v, q), 1e-12 * (1.0 + v));
    }
}

TEST(Layer1Cost, ProbabilityDomain)
{
    CostParams p;
    EXPECT_THROW(layer1_total_cost(p, 0, 1, 1.2, 0.1, 0.5), ParameterError);
    EXPECT_THROW(layer1_total_cost(p, 0, 1, 0.2, -0.1, 0.5), ParameterError);
    EXPECT_THROW(layer1_total_cost(p, 0, 1, 0.2, 0.1, 1.5), ParameterError);
    EXPECT_THROW(layer1_total_cost(p, 0, -1, 0.2, 0.1, 0.5), ParameterError);
    EXPECT_THROW(layer1_total_cost(p, 0, Count{10}, 1.5, 0.2, 0.1, 0.5), ParameterError);
}

TEST(Layer0Cost, ZeroOverhead)
{
    CostParams p;
    p.layer0_value = 20.0;
    p.alliance_cost = 3.0;
    EXPECT_NEAR(layer0_total_cost(p, 0.0, 40, 0.5, 0.1, 0.7), 20.0 * (0.1 * 0.7 + 0.5 * 0.3),
                1e-12);
}

TEST(Layer0Cost, PureDoNothingBranch)
{
    CostParams p;
    p.layer0_value = 20.0;
    p.alliance_cost = 3.0;
    p.alliance_fixed_cost = 7.0;
    EXPECT_NEAR(layer0_total_cost(p, 0.4, 40, 0.5, 0.1, 0.0), 10.0, 1e-12);
}

TEST(Layer0Cost, HandArithmetic)
{
    CostParams p;
    p.layer0_value = 20.0;
    // c0 = c_a * alpha * eta = 4.
    p.alliance_cost = 1.0;
    EXPECT_NEAR(layer0_total_cost(p, 0.2, 20, 0.5, 0.05, 0.8), 6.0, 1e-12);
    CostParams fixed;
    fixed.layer0_value = 20.0;
    fixed.alliance_fixed_cost = 4.0;
    EXPECT_NEAR(layer0_total_cost(fixed, 0.0, 20, 0.5, 0.05, 0.8), 6.0, 1e-12);
}

TEST(Layer0Cost, Errors)
{
    CostParams p;
    EXPECT_THROW(layer0_total_cost(p, -0.1, 20, 0.5, 0.05, 0.8), ParameterError);
    EXPECT_THROW(layer0_total_cost(p, 0.1, 0, 0.5, 0.05, 0.8), ParameterError);
    EXPECT_THROW(layer0_total_cost(p, 0.1, 20, 1.5, 0.05, 0.8), ParameterError);
    EXPECT_THROW(layer0_total_cost(p, 0.1, 20, 0.5, 0.05, -0.8), ParameterError);
}

TEST(CostParams, Validation)
{
    CostParams p;
    EXPECT_NO_THROW(p.validate());
    p.network_values.clear();
    EXPECT_THROW(p.validate(), ParameterError);
    p = CostParams{};
    p.backup_cost = -1.0;
    EXPECT_THROW(p.validate(), ParameterError);
    p = CostParams{};
    p.network_values = {-1.0};
    EXPECT_THROW(p.validate(), ParameterError);
}

TEST(CostParams, NonnegativeCosts)
{
    Pcg32 rng(32, 1);
    for (int i = 0; i < 1000; ++i)
    {
        CostParams p;
        p.network_values = {100.0 * uniform_open01(rng)};
        p.backup_cost = uniform_open01(rng);
        p.layer0_value = 1000.0 * uniform_open01(rng);
        p.alliance_cost = uniform_open01(rng);
        p.alliance_fixed_cost = 10.0 * uniform_open01(rng);
        auto const q = [&] { return uniform_open01(rng); };
        ASSERT_GE(layer1_total_cost(p, 0, static_cast<Count>(rng() % 41), q(), q(), q()), 0.0);
        ASSERT_GE(layer0_total_cost(p, q(), 1 + static_cast<Count>(rng() % 41), q(), q(), q()), 0.0);
    }
}
