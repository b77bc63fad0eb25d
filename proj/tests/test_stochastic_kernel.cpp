#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <mlbgg/rng.hpp>
#include <mlbgg/stochastic_kernel.hpp>

using namespace mlbgg;

TEST(Rng, SubstreamsAreReproducibleAndDistinct)
{
    auto a = substream(7, StreamPurpose::layer1_path, 3, 2);
    auto b = substream(7, StreamPurpose::layer1_path, 3, 2);
    EXPECT_EQ(a, b);
    std::set<std::uint32_t> firsts;
    for (std::uint64_t t = 0; t < 200; ++t)
    {
        for (std::uint64_t l = 0; l < 5; ++l)
        {
            auto r = substream(7, StreamPurpose::layer1_path, t, l);
            firsts.insert(r());
        }
    }
    EXPECT_GT(firsts.size(), 995u);
    auto c = substream(7, StreamPurpose::backup_supply, 3, 2);
    auto d = substream(8, StreamPurpose::layer1_path, 3, 2);
    EXPECT_NE(a(), c());
    EXPECT_NE(b(), d());
}

TEST(Rng, UniformIsOpenInterval)
{
    Pcg32 rng(1, 1);
    double lo = 1.0;
    double hi = 0.0;
    double sum = 0.0;
    int const n = 100000;
    for (int i = 0; i < n; ++i)
    {
        double const u = uniform_open01(rng);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Marks, UnitAndSupports)
{
    Pcg32 rng(2, 1);
    auto const unit = MarkDistribution::unit();
    auto const pois = MarkDistribution::poisson(2.0);
    auto const geo = MarkDistribution::geometric(0.4);
    double pois_sum = 0.0;
    double geo_sum = 0.0;
    int const n = 50000;
    for (int i = 0; i < n; ++i)
    {
        ASSERT_EQ(unit(rng), 1);
        auto const p = pois(rng);
        ASSERT_GE(p, 0);
        pois_sum += static_cast<double>(p);
        auto const g = geo(rng);
        ASSERT_GE(g, 1);
        geo_sum += static_cast<double>(g);
    }
    EXPECT_NEAR(pois_sum / n, 2.0, 3.0 * std::sqrt(2.0 / n));
    // Geometric on {1, 2, ...}: mean 1/p, variance (1-p)/p^2.
    EXPECT_NEAR(geo_sum / n, 2.5, 3.0 * std::sqrt(0.6 / 0.16 / n));
}

TEST(Marks, InvalidParameters)
{
    EXPECT_THROW(MarkDistribution::poisson(0.0).validate(), ParameterError);
    EXPECT_THROW(MarkDistribution::geometric(0.0).validate(), ParameterError);
    EXPECT_THROW(MarkDistribution::geometric(1.5).validate(), ParameterError);
}

TEST(MarkedPoisson, CountMeanAndVariance)
{
    double const lambda = 2.0;
    double const horizon = 5.0;
    int const n = 100000;
    double sum = 0.0;
    double sumsq = 0.0;
    for (int i = 0; i < n; ++i)
    {
        auto rng = substream(3, StreamPurpose::test, static_cast<std::uint64_t>(i));
        auto const s = sample_marked_poisson(lambda, MarkDistribution::unit(), horizon, rng);
        auto const k = static_cast<double>(s.events.size());
        sum += k;
        sumsq += k * k;
    }
    double const lt = lambda * horizon;
    double const mean = sum / n;
    double const var = sumsq / n - mean * mean;
    EXPECT_NEAR(mean, lt, 3.0 * std::sqrt(lt / n));
    // Var of the sample variance of a Poisson(m) is about (m + 2 m^2) / n.
    EXPECT_NEAR(var, lt, 3.0 * std::sqrt((lt + 2.0 * lt * lt) / n));
}

TEST(MarkedPoisson, StreamInvariants)
{
    Pcg32 rng(4, 1);
    for (int i = 0; i < 200; ++i)
    {
        auto const s = sample_marked_poisson(3.0, MarkDistribution::poisson(1.5), 4.0, rng);
        double prev = 0.0;
        for (auto const& e : s.events)
        {
            ASSERT_GT(e.time, prev);
            ASSERT_LE(e.time, 4.0);
            ASSERT_GE(e.mark, 0);
            prev = e.time;
        }
    }
}

TEST(MarkedPoisson, TinyHorizonIsEmpty)
{
    Pcg32 rng(5, 1);
    auto const s = sample_marked_poisson(1.0, MarkDistribution::unit(), 1e-9, rng);
    EXPECT_TRUE(s.events.empty());
}

TEST(MarkedPoisson, Deterministic)
{
    Pcg32 a(6, 9);
    Pcg32 b(6, 9);
    auto const s1 = sample_marked_poisson(1.5, MarkDistribution::geometric(0.5), 20.0, a);
    auto const s2 = sample_marked_poisson(1.5, MarkDistribution::geometric(0.5), 20.0, b);
    EXPECT_EQ(s1.events, s2.events);
}

TEST(MarkedPoisson, Errors)
{
    Pcg32 rng(7, 1);
    EXPECT_THROW(sample_marked_poisson(0.0, MarkDistribution::unit(), 1.0, rng), ParameterError);
    EXPECT_THROW(sample_marked_poisson(-1.0, MarkDistribution::unit(), 1.0, rng), ParameterError);
    EXPECT_THROW(sample_marked_poisson(1.0, MarkDistribution::unit(), 0.0, rng), ParameterError);
}

TEST(Schedule, Examples)
{
    auto const s = observation_epochs(1.0, 1.0, 3);
    EXPECT_EQ(s.epochs, (std::vector<double>{1.0, 2.0, 3.0}));
    auto const one = observation_epochs(0.5, 2.0, 1);
    EXPECT_EQ(one.epochs, (std::vector<double>{0.5}));
    EXPECT_EQ(one.tau0, 0.5);
    EXPECT_EQ(one.spacing, 2.0);
}

TEST(Schedule, ExactArithmeticGrid)
{
    auto const s = observation_epochs(0.25, 0.5, 1000);
    for (std::size_t k = 0; k < s.size(); ++k)
    {
        ASSERT_EQ(s[k], 0.25 + static_cast<double>(k) * 0.5);
        if (k + 1 < s.size())
        {
            ASSERT_EQ(s[k + 1] - s[k], 0.5);
        }
    }
}

TEST(Schedule, Errors)
{
    EXPECT_THROW(observation_epochs(0.0, 1.0, 3), ParameterError);
    EXPECT_THROW(observation_epochs(1.0, 0.0, 3), ParameterError);
    EXPECT_THROW(observation_epochs(1.0, -1.0, 3), ParameterError);
    EXPECT_THROW(observation_epochs(1.0, 1.0, 0), ParameterError);
}

TEST(Accumulate, EmptyStreamsGiveConstantPath)
{
    MarkedEventStream empty{{}, 1.0, 10.0};
    auto const path = accumulate_on_epochs(empty, empty, observation_epochs(1.0, 1.0, 4), 2, 3);
    EXPECT_EQ(path.attacker, (std::vector<Count>{2, 2, 2, 2}));
    EXPECT_EQ(path.honest, (std::vector<Count>{3, 3, 3, 3}));
}

TEST(Accumulate, HandPrefixSum)
{
    MarkedEventStream att{{{1.5, 3}, {2.5, 2}}, 1.0, 3.0};
    MarkedEventStream hon{{{1.0, 1}}, 1.0, 3.0};
    auto const path = accumulate_on_epochs(att, hon, observation_epochs(1.0, 1.0, 3), 0, 0);
    EXPECT_EQ(path.attacker, (std::vector<Count>{0, 3, 5}));
    // An event exactly on an epoch counts at that epoch.
    EXPECT_EQ(path.honest, (std::vector<Count>{1, 1, 1}));
}

TEST(Accumulate, UnitMarksCountEvents)
{
    Pcg32 rng(8, 1);
    auto const schedule = observation_epochs(1.0, 1.0, 30);
    for (int i = 0; i < 100; ++i)
    {
        auto const a = sample_marked_poisson(4.0, MarkDistribution::unit(), 30.0, rng);
        auto const h = sample_marked_poisson(1.0, MarkDistribution::unit(), 30.0, rng);
        auto const path = accumulate_on_epochs(a, h, schedule, 5, 0);
        auto const counted = std::count_if(a.events.begin(), a.events.end(),
                                           [&](auto const& e) { return e.time <= schedule.last(); });
        ASSERT_EQ(path.attacker.back() - 5, counted);
        ASSERT_EQ(path.attacker.front() >= 5, true);
        for (std::size_t k = 1; k < path.size(); ++k)
        {
            ASSERT_GE(path.attacker[k], path.attacker[k - 1]);
            ASSERT_GE(path.honest[k], path.honest[k - 1]);
        }
    }
}

TEST(Accumulate, CoverageError)
{
    MarkedEventStream short_stream{{}, 1.0, 2.0};
    EXPECT_THROW(accumulate_on_epochs(short_stream, short_stream, observation_epochs(1.0, 1.0, 3),
                                      0, 0),
                 ParameterError);
    MarkedEventStream ok{{}, 1.0, 3.0};
    EXPECT_THROW(accumulate_on_epochs(ok, ok, observation_epochs(1.0, 1.0, 3), -1, 0),
                 ParameterError);
}
