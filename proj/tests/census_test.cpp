#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rla/census.hpp"

using namespace rla;

namespace {

CensusModel model(std::vector<std::string> states, std::int64_t R, Divisor d = Divisor::dhondt, int g_max = 15)
{
    CensusModel m;
    m.constants.assign(states.size(), 0.0);
    m.states = std::move(states);
    m.representatives = R;
    m.divisor = d;
    m.g_max = g_max;
    return m;
}

Household hh(std::size_t state, int census, std::optional<int> pes = std::nullopt)
{
    Household h;
    h.id = "h";
    h.state = state;
    h.census_count = census;
    h.pes_count = pes;
    return h;
}

} // namespace

TEST(Apportion, DHondtExample)
{
    auto m = model({"X", "Y", "Z"}, 5);
    std::vector<std::int64_t> pop{100, 60, 40};
    EXPECT_EQ(apportion(m, pop), (std::vector<std::int64_t>{3, 1, 1}));
}

TEST(Apportion, SingleState)
{
    auto m = model({"X"}, 9);
    std::vector<std::int64_t> pop{5};
    EXPECT_EQ(apportion(m, pop), (std::vector<std::int64_t>{9}));
}

TEST(Apportion, MatchesColoringOracle)
{
    for (auto d : {Divisor::dhondt, Divisor::sainte_lague}) {
        for (std::int64_t R = 1; R <= 5; ++R) {
            auto m = model({"A", "B", "C"}, R, d);
            oracle::for_each_tally_upto(3, 14, [&](const Tally& t) {
                std::vector<std::int64_t> pop(t.counts().begin(), t.counts().end());
                if (std::find(pop.begin(), pop.end(), 0) != pop.end())
                    return; // row values must be positive
                auto expect = oracle::census(pop, {0, 0, 0}, R, d);
                if (!expect) {
                    EXPECT_THROW(apportion(m, pop), Error);
                    return;
                }
                EXPECT_EQ(apportion(m, pop), *expect);
            });
        }
    }
}

TEST(CensusAssorter, BoundaryValues)
{
    auto m = model({"X", "Y", "Z"}, 5, Divisor::dhondt, 4);
    std::vector<Household> h{hh(0, 3), hh(0, 2), hh(1, 4), hh(2, 1)};
    auto seats = apportion(m, census_populations(m, h));
    auto p = make_census_pair(m, h, seats, 0, 1);
    ASSERT_EQ(p.status, PairStatus::audited);
    const double base = m.g_max / (p.c * m.d(p.r2 + 1));
    EXPECT_DOUBLE_EQ(census_assorter_value(m, p, hh(2, 3), false), base);
    EXPECT_DOUBLE_EQ(census_assorter_value(m, p, hh(1, 4), false), 0.0);
    EXPECT_DOUBLE_EQ(census_assorter_value(m, p, hh(0, 2), false), 2 / (p.c * m.d(p.r1)) + base);
}

// Exhaustive: mean of the household assorter over PES counts > 1/2 exactly
// when the seat inequality holds on PES counts.
TEST(CensusAssorter, EquivalentToSeatInequality)
{
    Rng rng(21);
    int audited = 0;
    for (int inst = 0; inst < 12; ++inst) {
        auto m = model({"X", "Y"}, 1 + static_cast<std::int64_t>(rng.below(4)), Divisor::dhondt, 3);
        m.constants = {static_cast<double>(rng.below(4)), static_cast<double>(rng.below(4))};
        const std::size_t H = 8;
        std::vector<Household> h;
        for (std::size_t i = 0; i < H; ++i)
            h.push_back(hh(rng.below(2), static_cast<int>(rng.below(4))));
        std::vector<std::int64_t> seats;
        try {
            seats = apportion(m, census_populations(m, h));
        } catch (const Error&) {
            continue;
        }
        for (auto [s1, s2] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 0}}) {
            auto p = make_census_pair(m, h, seats, s1, s2);
            if (p.status == PairStatus::vacuous || !(p.c > 0))
                continue;
            ++audited;
            const std::int64_t d1 = p.r1, d2 = p.r2 + 1;
            const auto c1 = static_cast<std::int64_t>(m.constants[s1]);
            const auto c2 = static_cast<std::int64_t>(m.constants[s2]);
            std::vector<int> pes(H, 0);
            for (int code = 0; code < (1 << (2 * H)); ++code) {
                std::int64_t G1 = 0, G2 = 0;
                double sum = 0;
                for (std::size_t i = 0; i < H; ++i) {
                    pes[i] = (code >> (2 * i)) & 3;
                    h[i].pes_count = pes[i];
                    sum += census_assorter_value(m, p, h[i], true);
                    if (h[i].state == s1)
                        G1 += pes[i];
                    else
                        G2 += pes[i];
                }
                const std::int64_t lhs = (G1 + c1) * d2, rhs = (G2 + c2) * d1;
                if (lhs == rhs)
                    continue;
                ASSERT_EQ(sum / H > 0.5, lhs > rhs);
            }
            for (auto& x : h)
                x.pes_count.reset();
        }
    }
    EXPECT_GT(audited, 5);
}

TEST(ComparisonAssorter, AgreeingHouseholdsAreConstant)
{
    auto m = model({"X", "Y", "Z"}, 4, Divisor::dhondt, 5);
    std::vector<Household> h{hh(0, 3), hh(0, 4), hh(1, 2), hh(2, 5), hh(2, 1)};
    auto seats = apportion(m, census_populations(m, h));
    auto p = make_census_pair(m, h, seats, 0, 2);
    ASSERT_EQ(p.status, PairStatus::audited);
    const double expect = 0.5 + p.m / (2 * (p.z - p.m));
    for (int g = 0; g <= 5; ++g) {
        for (std::size_t s = 0; s < 3; ++s)
            EXPECT_NEAR(comparison_assorter_value(m, p, hh(s, g, g)), expect, 1e-15);
    }
}

TEST(ComparisonAssorter, MinimumIsZeroWhenZFromFirstTerm)
{
    auto m = model({"X", "Y"}, 3, Divisor::dhondt, 6);
    std::vector<Household> h{hh(0, 6), hh(0, 5), hh(0, 6), hh(1, 2), hh(1, 3)};
    auto seats = apportion(m, census_populations(m, h));
    auto p = make_census_pair(m, h, seats, 0, 1);
    ASSERT_EQ(p.status, PairStatus::audited);
    const double first = m.g_max / (p.c * m.d(p.r1));
    ASSERT_EQ(p.z, std::max(first, m.g_max / (p.c * m.d(p.r2 + 1))));
    const double v = comparison_assorter_value(m, p, hh(0, 6, 0));
    EXPECT_NEAR(v, 0.5 + (p.m - first) / (2 * (p.z - p.m)), 1e-15);
    if (p.z == first)
        EXPECT_NEAR(v, 0.0, 1e-15);
    EXPECT_GE(v, -1e-15);
}

// Mean of the comparison assorter > 1/2 exactly when the PES assorter mean is.
TEST(ComparisonAssorter, EquivalentToPesAssorter)
{
    Rng rng(5);
    int checked = 0;
    for (int inst = 0; inst < 300; ++inst) {
        auto m = model({"X", "Y", "Z"}, 2 + static_cast<std::int64_t>(rng.below(4)), Divisor::dhondt, 4);
        std::vector<Household> h;
        for (int i = 0; i < 7; ++i)
            h.push_back(hh(rng.below(3), static_cast<int>(rng.below(5))));
        std::vector<std::int64_t> seats;
        try {
            seats = apportion(m, census_populations(m, h));
        } catch (const Error&) {
            continue;
        }
        for (auto& x : h)
            x.pes_count = static_cast<int>(rng.below(5));
        for (std::size_t s1 = 0; s1 < 3; ++s1) {
            for (std::size_t s2 = 0; s2 < 3; ++s2) {
                if (s1 == s2)
                    continue;
                auto p = make_census_pair(m, h, seats, s1, s2);
                if (p.status != PairStatus::audited)
                    continue;
                double a = 0, A = 0;
                for (const auto& x : h) {
                    a += census_assorter_value(m, p, x, true);
                    A += comparison_assorter_value(m, p, x);
                }
                a /= h.size();
                A /= h.size();
                if (std::abs(a - 0.5) < 1e-9)
                    continue;
                ++checked;
                ASSERT_EQ(a > 0.5, A > 0.5);
            }
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(HouseholdSampler, FullFrameDrawsSurveyed)
{
    std::vector<Household> h{hh(0, 1), hh(0, 2, 2), hh(1, 3), hh(1, 1, 1)};
    HouseholdSampler s(h);
    Rng rng(1);
    EXPECT_EQ(s.surveyed_left(), 2u);
    for (int i = 0; i < 2; ++i) {
        auto k = s.draw(rng);
        EXPECT_TRUE(h[k].pes_count.has_value());
    }
    EXPECT_EQ(s.surveyed_left(), 0u);
}

TEST(HouseholdSampler, SingleCandidate)
{
    Rng rng(2);
    std::vector<std::size_t> surveyed{7}, none;
    EXPECT_EQ(sample_household(1, 1, surveyed, none, rng), 7u);
    std::vector<std::size_t> outside{3};
    EXPECT_EQ(sample_household(1, 0, none, outside, rng), 3u);
}

// With the survey drawn uniformly from the frame, every household of H1 is
// equally likely to come out.
TEST(HouseholdSampler, UniformOverRemaining)
{
    Rng rng(3);
    const std::size_t frame = 6, outside = 4, surveyed = 3;
    std::vector<int> hits(frame + outside);
    std::vector<std::size_t> frame_ids(frame), outside_ids(outside);
    std::iota(frame_ids.begin(), frame_ids.end(), 0);
    std::iota(outside_ids.begin(), outside_ids.end(), frame);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        rng.shuffle(frame_ids);
        std::vector<std::size_t> s(frame_ids.begin(), frame_ids.begin() + surveyed);
        ++hits[sample_household(frame + outside, frame, s, outside_ids, rng)];
    }
    const double p = 0.1, sd = std::sqrt(draws * p * (1 - p));
    for (int x : hits)
        EXPECT_NEAR(x, draws * p, 3 * sd);
}

TEST(CensusRla, NoSurveyMeansNoEvidence)
{
    auto m = model({"X", "Y"}, 3, Divisor::dhondt, 5);
    std::vector<Household> h{hh(0, 3), hh(0, 4), hh(1, 2), hh(1, 5), hh(0, 1)};
    Rng rng(0);
    auto r = census_rla(m, h, rng);
    EXPECT_EQ(r.risk_limit, 1.0);
    for (const auto& p : r.pairs) {
        if (p.pair.status == PairStatus::audited)
            EXPECT_EQ(p.risk, 1.0);
    }
    EXPECT_EQ(r.households_sampled, 0);
}

TEST(CensusRla, FullAgreementLowersRisk)
{
    auto m = model({"X", "Y"}, 2, Divisor::dhondt, 4);
    std::vector<Household> h;
    for (int i = 0; i < 3000; ++i)
        h.push_back(hh(i % 4 == 0 ? 1 : 0, 2, 2));
    Rng rng(0);
    auto r = census_rla(m, h, rng);
    EXPECT_EQ(r.census_seats, (std::vector<std::int64_t>{2, 0}));
    EXPECT_LT(r.risk_limit, 0.05);
    EXPECT_EQ(r.surveyed_sampled, r.households_sampled);
}

TEST(CensusRla, RiskIsMaxOverPairs)
{
    auto m = model({"X", "Y", "Z"}, 6, Divisor::dhondt, 4);
    Rng gen(8);
    std::vector<Household> h;
    for (int i = 0; i < 600; ++i) {
        int g = 1 + static_cast<int>(gen.below(4));
        h.push_back(hh(gen.below(3), g, g));
    }
    Rng rng(1);
    auto r = census_rla(m, h, rng);
    double mx = 0;
    for (const auto& p : r.pairs)
        mx = std::max(mx, p.risk);
    EXPECT_EQ(r.risk_limit, mx);
    EXPECT_EQ(r.pairs.size(), 6u);
}

TEST(GenerateData, ConstantsReproduceRealAllocation)
{
    std::vector<District> d{{"N", 356340}, {"L", 262234}, {"La", 155632}, {"P", 102052}, {"F", 47014}};
    HouseholdSizeDistribution dist{{0, 0.28, 0.35, 0.15, 0.13, 0.06, 0.03}};
    Rng rng(77);
    auto inst = generate_cyprus_data(d, dist, 0.01, 56, Divisor::dhondt, 15, rng);
    std::vector<std::int64_t> real;
    for (const auto& x : d)
        real.push_back(x.population);
    CensusModel zero = inst.model;
    std::fill(zero.constants.begin(), zero.constants.end(), 0.0);
    EXPECT_EQ(apportion(inst.model, census_populations(inst.model, inst.households)), apportion(zero, real));
    auto pop = census_populations(inst.model, inst.households);
    for (std::size_t s = 0; s < d.size(); ++s)
        EXPECT_EQ(pop[s] + static_cast<std::int64_t>(inst.model.constants[s]), d[s].population);
}

TEST(GenerateData, DegenerateDistribution)
{
    std::vector<District> d{{"A", 1000}, {"B", 503}};
    HouseholdSizeDistribution dist{{0, 0, 0, 1}};
    Rng rng(1);
    auto inst = generate_cyprus_data(d, dist, 0.0, 4, Divisor::dhondt, 3, rng);
    for (const auto& h : inst.households)
        EXPECT_EQ(h.census_count, 3);
    EXPECT_EQ(inst.households.size(), 333u + 168u);
    EXPECT_EQ(inst.model.constants[0], 1.0);
    EXPECT_EQ(inst.model.constants[1], -1.0);
}

TEST(GenerateData, DisagreementAndSurvey)
{
    std::vector<District> d{{"A", 20000}, {"B", 9000}};
    HouseholdSizeDistribution dist{{0, 0, 0.5, 0.5}};
    Rng rng(2);
    auto inst = generate_cyprus_data(d, dist, 0.0, 5, Divisor::dhondt, 3, rng);
    inject_census_disagreement(inst, dist, 0.05, rng);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < inst.households.size(); ++i)
        differ += inst.full_pes[i] != inst.households[i].census_count;
    // Half of the redraws land on the same count.
    const double n = 0.05 * inst.households.size();
    EXPECT_NEAR(differ, n / 2, 4 * std::sqrt(n / 4));
    auto s = survey(inst, 0.01, rng);
    std::size_t surveyed = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].pes_count) {
            ++surveyed;
            EXPECT_EQ(*s[i].pes_count, inst.full_pes[i]);
        }
    }
    EXPECT_EQ(surveyed, static_cast<std::size_t>(std::llround(0.01 * s.size())));
}
