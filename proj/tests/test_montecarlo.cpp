#include <gtest/gtest.h>

#include <mlbgg/montecarlo.hpp>

#include <cmath>
#include <random>

using namespace mlbgg;

namespace
{

Scenario small_scenario(std::size_t trials)
{
    Scenario s;
    Layer1NetworkConfig net;
    net.nodes = 20;
    net.lambda_attacker = 1.1;
    s.layer1.assign(5, net);
    s.layer0.eta = 4;
    s.layer0.alpha = 0.3;
    s.n_trials = trials;
    s.seed = 11;
    return s;
}

void expect_same(Estimate const& a, Estimate const& b)
{
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.count, b.count);
}

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

TEST(Summarize, ConstantInput)
{
    std::vector<double> xs(50, 2.5);
    auto const e = summarize(xs);
    EXPECT_EQ(e.mean, 2.5);
    EXPECT_EQ(e.std_error, 0.0);
    EXPECT_TRUE(e.contains(2.5));
    EXPECT_FALSE(e.degenerate);
}

TEST(Summarize, SingleSampleIsDegenerate)
{
    std::vector<double> xs{0.7};
    auto const e = summarize(xs);
    EXPECT_TRUE(e.degenerate);
    EXPECT_EQ(e.ci_low, 0.7);
    EXPECT_EQ(e.ci_high, 0.7);
}

TEST(Summarize, BernoulliStandardError)
{
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.3);
    std::vector<double> xs(20000);
    for (auto& x : xs)
        x = coin(rng) ? 1.0 : 0.0;
    auto const e = summarize(xs);
    double const p = e.mean;
    EXPECT_NEAR(e.std_error, std::sqrt(p * (1 - p) / 20000.0), 1e-5);
    EXPECT_TRUE(e.contains(e.mean));
    EXPECT_NEAR(e.mean, 0.3, 5 * e.std_error);
}

TEST(Summarize, EmptyThrows)
{
    EXPECT_THROW(summarize(std::vector<double>{}), ParameterError);
}

TEST(RunTrials, SingleTrialDegenerate)
{
    // Layer-1 rates pool every network, so only per-trial estimates degenerate.
    auto const r = run_trials(small_scenario(1)).report;
    EXPECT_TRUE(r.rho1.degenerate);
    EXPECT_TRUE(r.layer0.burst_do_nothing.degenerate);
    EXPECT_FALSE(r.layer1.burst_do_nothing.degenerate);
    EXPECT_EQ(r.layer0.burst_action.ci_low, r.layer0.burst_action.ci_high);
}

TEST(RunTrials, Deterministic)
{
    auto const s = small_scenario(300);
    auto const a = run_trials(s);
    auto const b = run_trials(s);
    expect_same(a.report.rho1, b.report.rho1);
    expect_same(a.report.layer1.burst_action, b.report.layer1.burst_action);
    expect_same(a.report.layer0.burst_action, b.report.layer0.burst_action);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
    {
        EXPECT_EQ(a.rows[i].burst, b.rows[i].burst);
        EXPECT_EQ(a.rows[i].backup, b.rows[i].backup);
    }
}

TEST(RunTrials, WorkerCountIrrelevant)
{
    auto const s = small_scenario(300);
    auto const a = run_trials(s, 1);
    auto const b = run_trials(s, 8);
    expect_same(a.report.rho1, b.report.rho1);
    expect_same(a.report.layer1.burst_do_nothing, b.report.layer1.burst_do_nothing);
    expect_same(a.report.layer1.burst_action, b.report.layer1.burst_action);
    expect_same(a.report.layer0.burst_do_nothing, b.report.layer0.burst_do_nothing);
    expect_same(a.report.layer0.burst_action, b.report.layer0.burst_action);
    EXPECT_EQ(a.report.mean_backup, b.report.mean_backup);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
    {
        EXPECT_EQ(a.rows[i].outcome.nu, b.rows[i].outcome.nu);
        EXPECT_EQ(a.rows[i].burst, b.rows[i].burst);
    }
}

TEST(RunTrials, SeedChangesResults)
{
    auto s = small_scenario(300);
    auto const a = run_trials(s, 1, false).report;
    s.seed = 12;
    auto const b = run_trials(s, 1, false).report;
    EXPECT_NE(a.rho1.mean, b.rho1.mean);
}

TEST(RunTrials, ReportInvariants)
{
    auto const r = run_trials(small_scenario(500), 2, false).report;
    for (auto const* layer : {&r.layer1, &r.layer0})
    {
        EXPECT_LT(layer->decision_identity_residual, 1e-9);
        EXPECT_TRUE(in_unit(layer->burst_do_nothing.mean));
        EXPECT_TRUE(in_unit(layer->burst_action.mean));
        EXPECT_LE(layer->burst_action.mean, layer->burst_do_nothing.mean);
        EXPECT_TRUE(in_unit(layer->censor_rate_do_nothing));
        EXPECT_TRUE(in_unit(layer->prev_below));
    }
    EXPECT_TRUE(in_unit(r.rho1.mean));
    EXPECT_GE(r.mean_backup, 0.0);
    EXPECT_LE(r.mean_backup, 4.0);
    EXPECT_EQ(r.trials, 500u);
    EXPECT_EQ(r.networks, 5u);
}

TEST(RunTrials, RowsCoverEveryTrialNetworkAndStrategy)
{
    auto const s = small_scenario(40);
    auto const res = run_trials(s);
    std::size_t l1 = 0;
    std::size_t l0 = 0;
    for (auto const& row : res.rows)
    {
        (row.layer == 1 ? l1 : l0) += 1;
        if (row.strategy == Strategy::do_nothing)
        {
            EXPECT_EQ(row.backup, 0);
        }
    }
    EXPECT_EQ(l1, 40u * 5u * 2u);
    EXPECT_EQ(l0, 40u * 2u);
}
