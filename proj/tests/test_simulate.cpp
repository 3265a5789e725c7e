#include "gsc/simulate.hpp"
#include "gsc/stats.hpp"
#include "gsc/summary.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace gsc;

namespace {

SpacePtr line(Pos n) { return std::make_shared<const CoordinateSpace>(CoordinateSpace::single("s", n)); }

std::vector<Pos> marked(const FeatureTrack& t) {
    std::vector<Pos> out;
    const auto d = t.to_dense();
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d[k]) out.push_back(static_cast<Pos>(k));
    }
    return out;
}

}  // namespace

TEST(Markov, P0OneIsFairCoin) {
    Engine rng = make_engine(1);
    auto x = simulate_markov({100000, 1.0, 20}, rng);
    double m = 0;
    for (auto v : x) m += v;
    m /= double(x.size());
    EXPECT_NEAR(m, 0.5, 3 * std::sqrt(0.25 / double(x.size())));
}

TEST(Markov, WindowOneTransition) {
    Engine rng = make_engine(2);
    auto x = simulate_markov({200000, 0.1, 1}, rng);
    double ones = 0, follow = 0;
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (x[k - 1]) {
            ones += 1;
            follow += x[k];
        }
    }
    EXPECT_NEAR(follow / ones, 0.95, 0.005);
}

TEST(Markov, PositiveLagOneAutocorrelation) {
    Engine rng = make_engine(3);
    auto x = simulate_markov({50000, 0.1, 20}, rng);
    double m = 0;
    for (auto v : x) m += v;
    m /= double(x.size());
    double c0 = 0, c1 = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        c0 += (x[k] - m) * (x[k] - m);
        if (k) c1 += (x[k] - m) * (x[k - 1] - m);
    }
    EXPECT_GT(c1 / c0, 0.1);
}

TEST(Markov, ParameterErrors) {
    Engine rng = make_engine(4);
    EXPECT_THROW(simulate_markov({10, 0.0, 2}, rng), ParameterError);
    EXPECT_THROW(simulate_markov({10, 1.5, 2}, rng), ParameterError);
    EXPECT_THROW(simulate_markov({10, 0.5, 0}, rng), ParameterError);
    EXPECT_THROW(simulate_markov({0, 0.5, 2}, rng), ParameterError);
}

TEST(DerivedFeatures, AllOnesAndAllZeros) {
    const Pos n = 40;
    auto s = line(n);
    std::vector<std::uint8_t> ones(n, 1), zeros(n, 0);
    EXPECT_EQ(derive_features(ones, DerivedFeatureRule::PatternMatch, s).coverage(), 0);
    auto rd = derive_features(ones, DerivedFeatureRule::RunDensity, s);
    ASSERT_EQ(rd.run_count(), 1u);
    // 0-based: every window start k with k + 10 <= n
    EXPECT_EQ(rd.runs()[0], (Interval{0, n - 9}));
    EXPECT_EQ(derive_features(zeros, DerivedFeatureRule::PatternMatch, s).coverage(), 0);
    EXPECT_EQ(derive_features(zeros, DerivedFeatureRule::RunDensity, s).coverage(), 0);
}

TEST(DerivedFeatures, HandBuiltSequence) {
    //                                 0  1  2  3  4  5  6  7  8  9 10 11 12 13 14
    std::vector<std::uint8_t> x{1, 1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1};
    auto s = line(15);
    // 1,1,1,0,0 starts at 0 and at 6
    EXPECT_EQ(marked(derive_features(x, DerivedFeatureRule::PatternMatch, s)), (std::vector<Pos>{0, 6}));
    // windows of 10: sums at k = 0..5 are 7, 7, 7, 7, 8, 7; more than six 1s everywhere
    std::vector<Pos> want;
    for (Pos k = 0; k + 10 <= 15; ++k) {
        int sum = 0;
        for (Pos j = k; j < k + 10; ++j) sum += x[j];
        if (sum > 6) want.push_back(k);
    }
    EXPECT_EQ(marked(derive_features(x, DerivedFeatureRule::RunDensity, s)), want);
}

TEST(NeymanScott, ZeroRateIsEmpty) {
    NeymanScottParams p;
    p.regions = {{10000, 1e-12, 10, 10, 5}};
    Engine rng = make_engine(5);
    EXPECT_EQ(simulate_neyman_scott(p, line(10000), rng).coverage(), 0);
    p.regions[0].rate = 0.0;
    EXPECT_EQ(simulate_neyman_scott(p, line(10000), rng).coverage(), 0);
}

TEST(NeymanScott, ValidatesParameters) {
    NeymanScottParams p;
    Engine rng = make_engine(6);
    EXPECT_THROW(simulate_neyman_scott(p, line(10), rng), ParameterError);
    p.regions = {{100, -0.1, 10, 10, 5}};
    EXPECT_THROW(validate(p), ParameterError);
    p.regions = {{100, 0.1, 0, 10, 5}};
    EXPECT_THROW(validate(p), ParameterError);
    p.regions = {{0, 0.1, 1, 10, 5}};
    EXPECT_THROW(validate(p), ParameterError);
}

TEST(NeymanScott, OccupiedCentersMatchPoissonMembers) {
    // offset and length means of 1 put every member of a cluster on the
    // single base after its center, so coverage counts centers with at least
    // one member: 100 centers * (1 - e^-2), less rare collisions
    NeymanScottParams p;
    p.regions = {{100000, 0.001, 2.0, 1.0, 1.0, OffsetSign::Downstream}};
    std::vector<double> counts;
    for (int s = 0; s < 500; ++s) {
        Engine rng = child_engine(7, s);
        counts.push_back(double(simulate_neyman_scott(p, line(100000), rng).coverage()));
    }
    const double expected = 100.0 * (1.0 - std::exp(-2.0));
    EXPECT_NEAR(mean(counts), expected, 3.0 * sd_sample(counts) / std::sqrt(double(counts.size())) + 0.1);
}

TEST(NeymanScott, GeometricMean) {
    Engine rng = make_engine(8);
    std::vector<double> v(200000);
    for (auto& x : v) x = double(geometric_with_mean(75.0, rng));
    EXPECT_NEAR(mean(v), 75.0, 3 * sd_sample(v) / std::sqrt(double(v.size())));
    EXPECT_GE(*std::min_element(v.begin(), v.end()), 1.0);
}

TEST(NeymanScott, RegionOverlapModelCoverage) {
    Engine rng = make_engine(9);
    auto sp = simulate_piecewise_pair(region_overlap_model(), rng);
    const double cov = double(sp.pair.a().coverage()) / double(sp.pair.size());
    EXPECT_NEAR(cov, 0.17, 0.03);
}

TEST(PiecewisePair, TruthSegmentation) {
    Engine rng = make_engine(10);
    NeymanScottParams one;
    one.regions = {{5000, 0.01, 10, 10, 5}};
    EXPECT_EQ(simulate_piecewise_pair(one, rng).truth.cuts(), (std::vector<Pos>{0, 5000}));
    EXPECT_EQ(simulate_piecewise_pair(two_region_model(), rng).truth.cuts(), (std::vector<Pos>{0, 10000, 20000}));
}

TEST(PiecewisePair, DeterministicFromSeed) {
    Engine a = make_engine(11), b = make_engine(11);
    auto x = simulate_piecewise_pair(two_region_model(), a);
    auto y = simulate_piecewise_pair(two_region_model(), b);
    EXPECT_EQ(x.pair.a(), y.pair.a());
    EXPECT_EQ(x.pair.b(), y.pair.b());
}

TEST(PiecewisePair, IndependentTracks) {
    // A and B from the same draw should overlap like A and B from unrelated
    // draws, which share the marginals but are independent by construction
    NeymanScottParams m;
    m.regions = {{20000, 0.01, 10, 10, 5}};
    std::vector<SimulatedPair> sims;
    for (int s = 0; s < 600; ++s) {
        Engine rng = child_engine(12, s);
        sims.push_back(simulate_piecewise_pair(m, rng));
    }
    std::vector<double> diff;
    for (std::size_t s = 0; s + 1 < sims.size(); s += 2) {
        TrackPair cross(sims[s].pair.a(), sims[s + 1].pair.b());
        const Pos n = cross.size();
        diff.push_back(mean_overlap(sims[s].pair, 0, n).value - mean_overlap(cross, 0, n).value);
    }
    EXPECT_LT(std::abs(mean(diff)), 3.5 * sd_sample(diff) / std::sqrt(double(diff.size())));
}

TEST(PiecewisePair, BedRoundTrip) {
    Engine rng = make_engine(13);
    auto sp = simulate_piecewise_pair(two_region_model(), rng);
    std::stringstream io;
    write_bed(io, sp.pair.a());
    EXPECT_EQ(parse_bed(io, sp.pair.a().space_ptr()).track, sp.pair.a());
}
