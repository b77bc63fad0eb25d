#include <gtest/gtest.h>

#include <mlbgg/config.hpp>
#include <mlbgg/optimizer.hpp>

using namespace mlbgg;

namespace
{

Scenario small_scenario()
{
    Scenario s;
    Layer1NetworkConfig net;
    net.nodes = 20;
    net.lambda_attacker = 1.1;
    net.lambda_honest = 1.0;
    s.layer1.assign(5, net);
    s.layer0.eta = 10;
    s.cost.network_values = {100.0};
    s.cost.backup_cost = 1.0;
    s.cost.layer0_value = 1000.0;
    s.cost.alliance_fixed_cost = 100.0;
    s.n_trials = 400;
    s.seed = 3;
    return s;
}

std::size_t scan_argmin(std::vector<double> const& costs)
{
    std::size_t best = 0;
    for (std::size_t i = 0; i < costs.size(); ++i)
        if (costs[i] < costs[best])
            best = i;
    return best;
}

} // namespace

TEST(Argmin, FirstSmallestAndOracle)
{
    std::vector<CostPoint> pts;
    for (int b = 0; b <= 20; ++b)
        pts.push_back({static_cast<double>(b), (b - 7.0) * (b - 7.0) + 3.0, 0, 0, 0});
    EXPECT_EQ(argmin_first(pts), 7u);
    std::vector<CostPoint> flat(5, CostPoint{0, 1.0, 0, 0, 0});
    EXPECT_EQ(argmin_first(flat), 0u);
    EXPECT_THROW(argmin_first(std::vector<CostPoint>{}), ParameterError);
}

TEST(BackupSweep, NoValueAtRiskPrefersZero)
{
    auto s = small_scenario();
    s.cost.network_values = {0.0};
    auto const opt = optimize_backup(s, 0, 10, s.n_trials, s.seed);
    EXPECT_EQ(opt.best_backup, 0);
}

TEST(BackupSweep, FreeBackupsNeverHurt)
{
    auto s = small_scenario();
    s.cost.backup_cost = 0.0;
    auto const opt = optimize_backup(s, 0, 20, s.n_trials, s.seed);
    auto const& pts = opt.curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i)
        ASSERT_LE(pts[i].cost, pts[i - 1].cost + 1e-9);
    // Ties resolve to the smallest B; the cost there equals the cost at the range maximum.
    auto const best = static_cast<std::size_t>(opt.best_backup);
    EXPECT_NEAR(pts[best].cost, pts.back().cost, 1e-9);
}

TEST(BackupSweep, CurveMatchesIndependentRecomputation)
{
    auto const s = small_scenario();
    auto const sweep = sweep_backup(s, 0, 12, s.n_trials, s.seed, 1, true);
    ASSERT_EQ(sweep.curve.points.size(), 13u);
    std::size_t const nets = s.layer1.size();
    std::vector<double> costs;
    for (std::size_t b = 0; b < 13; ++b)
    {
        double cost = 0.0;
        for (std::size_t l = 0; l < nets; ++l)
        {
            double q1 = 0.0;
            for (std::size_t t = 0; t < s.n_trials; ++t)
                q1 += sweep.bursts[t][l][b];
            q1 /= static_cast<double>(s.n_trials);
            auto const& base = sweep.baselines[l];
            double const v = s.cost.network_value(l);
            cost += (s.cost.backup_cost * static_cast<double>(b) + v * q1) * base.p_prev_below
                    + v * base.q0 * (1.0 - base.p_prev_below);
        }
        EXPECT_NEAR(sweep.curve.points[b].cost, cost, 1e-9);
        EXPECT_EQ(sweep.curve.points[b].x, static_cast<double>(b));
        costs.push_back(sweep.curve.points[b].cost);
    }
    EXPECT_EQ(argmin_first(sweep.curve.points), scan_argmin(costs));
    EXPECT_NO_THROW(sweep.curve.validate());
}

TEST(BackupSweep, CoupledMonotoneBursts)
{
    auto const s = small_scenario();
    auto const sweep = sweep_backup(s, 0, 20, s.n_trials, s.seed, 1, true);
    for (auto const& trial : sweep.bursts)
        for (auto const& net : trial)
            for (std::size_t b = 1; b < net.size(); ++b)
                ASSERT_LE(net[b], net[b - 1]);
}

TEST(BackupSweep, WorkerCountIrrelevant)
{
    auto const s = small_scenario();
    auto const a = sweep_backup(s, 0, 10, s.n_trials, s.seed, 1);
    auto const b = sweep_backup(s, 0, 10, s.n_trials, s.seed, 4);
    for (std::size_t i = 0; i < a.curve.points.size(); ++i)
    {
        EXPECT_EQ(a.curve.points[i].cost, b.curve.points[i].cost);
        EXPECT_EQ(a.curve.points[i].std_error, b.curve.points[i].std_error);
    }
}

TEST(BackupSweep, Errors)
{
    auto const s = small_scenario();
    EXPECT_THROW(sweep_backup(s, 5, 4, 10, 1), ParameterError);
    EXPECT_THROW(sweep_backup(s, -1, 4, 10, 1), ParameterError);
    EXPECT_THROW(sweep_backup(s, 0, 4, 0, 1), ParameterError);
}

TEST(BackupOptimum, Efficiency)
{
    auto const s = small_scenario();
    auto const opt = optimize_backup(s, 0, 20, s.n_trials, s.seed);
    auto const best = static_cast<std::size_t>(opt.best_backup);
    EXPECT_NEAR(opt.efficiency, 1.0 - opt.curve.points[best].cost / opt.baseline_cost, 1e-12);
    // At B = 0 the safety mode changes nothing.
    EXPECT_NEAR(opt.curve.points[0].cost, opt.baseline_cost, 1e-9);
}

TEST(RandomBackup, ZeroRhoEqualsNoReserve)
{
    auto const s = small_scenario();
    auto const r = layer1_random_backup_cost(s, 0.0, s.n_trials, s.seed);
    auto const sweep = sweep_backup(s, 0, 0, s.n_trials, s.seed);
    EXPECT_NEAR(r.cost, sweep.curve.points[0].cost, 1e-9);
    EXPECT_EQ(r.mean_backup, 0.0);
}

TEST(AlphaSweep, CoupledMonotoneAndComposition)
{
    auto const s = small_scenario();
    auto const grid = std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
    auto const sweep = sweep_alpha(s, grid, 0.4, s.n_trials, s.seed, 1, true);
    for (auto const& row : sweep.bursts)
        for (std::size_t a = 1; a < row.size(); ++a)
            ASSERT_LE(row[a], row[a - 1]);
    for (double rho : {0.0, 0.15, 0.4, 0.9, 1.0})
    {
        auto const opt = optimize_alpha(s, grid, rho, s.n_trials, s.seed);
        EXPECT_EQ(opt.alpha_star, opt.alpha0 ? std::min(rho, *opt.alpha0) : rho);
        EXPECT_LE(opt.alpha_star, rho);
        if (opt.alpha0)
        {
            EXPECT_LE(opt.alpha_star, *opt.alpha0);
        }
    }
}

TEST(AlphaSweep, Alpha0IsFirstQualifyingGridPoint)
{
    auto const s = small_scenario();
    auto const grid = linear_grid(0.0, 1.0, 0.05);
    auto const sweep = sweep_alpha(s, grid, 0.5, s.n_trials, s.seed);
    auto const opt = optimize_alpha(s, grid, 0.5, s.n_trials, s.seed);
    std::optional<double> expected;
    for (std::size_t a = 0; a < grid.size(); ++a)
    {
        if (sweep.no_action_cost[a] >= sweep.action_cost[a])
        {
            expected = grid[a];
            break;
        }
    }
    EXPECT_EQ(opt.alpha0, expected);
}

TEST(AlphaSweep, CheapActionGivesGridMinimum)
{
    auto s = small_scenario();
    s.cost.alliance_cost = 0.0;
    s.cost.alliance_fixed_cost = 0.0;
    auto const grid = std::vector<double>{0.1, 0.2, 0.4};
    auto const opt = optimize_alpha(s, grid, 0.9, s.n_trials, s.seed);
    ASSERT_TRUE(opt.alpha0.has_value());
    EXPECT_EQ(*opt.alpha0, 0.1);
    EXPECT_EQ(opt.alpha_star, 0.1);
}

TEST(AlphaSweep, NoQualifyingPointFallsBackToRho)
{
    auto s = small_scenario();
    s.cost.alliance_fixed_cost = 1e6;
    auto const opt = optimize_alpha(s, std::vector<double>{0.0, 0.5, 1.0}, 0.37, s.n_trials, s.seed);
    EXPECT_FALSE(opt.alpha0.has_value());
    EXPECT_EQ(opt.alpha_star, 0.37);
}

TEST(AlphaSweep, MinComposition)
{
    EXPECT_EQ(compose_alpha_star(0.2, 0.46), 0.2);
    EXPECT_EQ(compose_alpha_star(0.6, 0.46), 0.46);
    EXPECT_EQ(compose_alpha_star(0.6, std::nullopt), 0.6);
}

TEST(AlphaSweep, Errors)
{
    auto const s = small_scenario();
    EXPECT_THROW(sweep_alpha(s, std::vector<double>{}, 0.5, 10, 1), ParameterError);
    EXPECT_THROW(sweep_alpha(s, std::vector<double>{0.2, 0.1}, 0.5, 10, 1), ParameterError);
    EXPECT_THROW(optimize_alpha(s, std::vector<double>{0.2}, 1.5, 10, 1), ParameterError);
}

TEST(Eta, SingletonRange)
{
    auto const s = small_scenario();
    std::vector<Count> one{7};
    auto const opt = optimize_eta(s, one, 200, 1);
    EXPECT_EQ(opt.eta_star, 7);
    EXPECT_EQ(opt.eta1, 7);
    EXPECT_EQ(opt.eta0, 7);
}

TEST(Eta, MinCompositionAndScanOracle)
{
    auto const s = small_scenario();
    std::vector<Count> range{3, 5, 9};
    auto const opt = optimize_eta(s, range, 200, 2);
    std::vector<double> c1;
    std::vector<double> c0;
    for (std::size_t i = 0; i < range.size(); ++i)
    {
        c1.push_back(opt.layer1_curve.points[i].cost);
        c0.push_back(opt.layer0_curve.points[i].cost);
    }
    EXPECT_EQ(opt.eta1, range[scan_argmin(c1)]);
    EXPECT_EQ(opt.eta0, range[scan_argmin(c0)]);
    EXPECT_EQ(opt.eta_star, std::min(opt.eta1, opt.eta0));
}

TEST(Eta, Errors)
{
    auto const s = small_scenario();
    EXPECT_THROW(optimize_eta(s, std::vector<Count>{}, 10, 1), ParameterError);
    EXPECT_THROW(optimize_eta(s, std::vector<Count>{5, 3}, 10, 1), ParameterError);
}
