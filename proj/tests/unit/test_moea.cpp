#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "wsnloc/errors.hpp"
#include "wsnloc/field.hpp"
#include "wsnloc/moea.hpp"

namespace wsnloc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ObjectiveVector ov(double err, std::size_t count) { return {err, count, false}; }

AnchorChromosome chrom(std::initializer_list<Vec2> pts) {
    std::vector<Vec2> v(pts);
    return AnchorChromosome::from_anchors(v);
}

AnchorChromosome numbered(std::size_t n, double base) {
    std::vector<Vec2> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back({base + static_cast<double>(i), base + static_cast<double>(i)});
    return AnchorChromosome::from_anchors(v);
}

// Peel fronts by re-testing domination among the survivors from scratch.
std::vector<std::vector<std::size_t>> brute_force_fronts(const std::vector<ObjectiveVector>& objs) {
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<bool> taken(objs.size(), false);
    std::size_t left = objs.size();
    while (left > 0) {
        std::vector<std::size_t> front;
        for (std::size_t p = 0; p < objs.size(); ++p) {
            if (taken[p]) continue;
            bool dominated = false;
            for (std::size_t q = 0; q < objs.size() && !dominated; ++q) {
                if (taken[q] || q == p) continue;
                dominated = objs[q].error_m <= objs[p].error_m && objs[q].anchor_count <= objs[p].anchor_count &&
                            (objs[q].error_m < objs[p].error_m || objs[q].anchor_count < objs[p].anchor_count);
            }
            if (!dominated) front.push_back(p);
        }
        for (std::size_t p : front) taken[p] = true;
        left -= front.size();
        fronts.push_back(front);
    }
    return fronts;
}

TEST(Dominates, Examples) {
    EXPECT_TRUE(dominates(ov(8.5, 6), ov(10.5, 6)));
    EXPECT_FALSE(dominates(ov(3.956, 9), ov(10.511, 3)));
    EXPECT_FALSE(dominates(ov(10.511, 3), ov(3.956, 9)));
    EXPECT_FALSE(dominates(ov(4, 4), ov(4, 4)));
}

TEST(NondominatedSort, HandExample) {
    std::vector<ObjectiveVector> objs{ov(1, 2), ov(2, 1), ov(3, 3)};
    auto fronts = nondominated_sort(objs);
    ASSERT_EQ(fronts.size(), 2u);
    EXPECT_EQ(fronts[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(fronts[1], (std::vector<std::size_t>{2}));
    std::vector<ObjectiveVector> one{ov(7, 7)};
    EXPECT_EQ(nondominated_sort(one), (std::vector<std::vector<std::size_t>>{{0}}));
}

TEST(NondominatedSort, MatchesBruteForce) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> size(1, 30), count(3, 12), coarse(0, 5);
    std::uniform_real_distribution<double> err(0, 30);
    std::size_t mismatches = 0;
    for (int pop = 0; pop < 200; ++pop) {
        std::vector<ObjectiveVector> objs(size(rng));
        // coarse errors on some populations force ties
        const bool ties = pop % 3 == 0;
        for (auto& o : objs) o = ov(ties ? static_cast<double>(coarse(rng)) : err(rng), count(rng));
        if (nondominated_sort(objs) != brute_force_fronts(objs)) ++mismatches;
    }
    EXPECT_EQ(mismatches, 0u);
}

TEST(CrowdingDistance, HandExample) {
    std::vector<ObjectiveVector> front{ov(5, 1), ov(3, 2), ov(1, 4)};
    auto cd = crowding_distance(front);
    EXPECT_EQ(cd[0], kInf);
    EXPECT_EQ(cd[1], 2.0);
    EXPECT_EQ(cd[2], kInf);
}

TEST(CrowdingDistance, TwoMembersAndDegenerateObjective) {
    std::vector<ObjectiveVector> two{ov(1, 3), ov(2, 2)};
    EXPECT_EQ(crowding_distance(two), (std::vector<double>{kInf, kInf}));

    std::vector<ObjectiveVector> flat{ov(4, 3), ov(4, 5), ov(4, 9)};
    auto cd = crowding_distance(flat);
    EXPECT_EQ(cd[1], (9.0 - 3.0) / (9.0 - 3.0));
}

TEST(Crossover, OnePointEqualLengths) {
    auto p1 = numbered(4, 0), p2 = numbered(4, 50);
    auto [a, b] = one_point_crossover(p1, p2, 2, 2);
    EXPECT_EQ(a.anchors(), (std::vector<Vec2>{{0, 0}, {1, 1}, {52, 52}, {53, 53}}));
    EXPECT_EQ(b.anchors(), (std::vector<Vec2>{{50, 50}, {51, 51}, {2, 2}, {3, 3}}));
}

TEST(Crossover, OnePointUnequalLengths) {
    auto [a, b] = one_point_crossover(numbered(3, 0), numbered(5, 50), 1, 4);
    EXPECT_EQ(a.anchor_count(), 2u);
    EXPECT_EQ(b.anchor_count(), 6u);
    EXPECT_EQ(a.anchors()[1], (Vec2{54, 54}));
    EXPECT_EQ(b.anchors()[4], (Vec2{1, 1}));
}

TEST(Crossover, TwoPointSwapsSegments) {
    auto [a, b] = two_point_crossover(numbered(4, 0), numbered(5, 50), 1, 3, 2, 3);
    EXPECT_EQ(a.anchors(), (std::vector<Vec2>{{0, 0}, {52, 52}, {3, 3}}));
    EXPECT_EQ(b.anchors(), (std::vector<Vec2>{{50, 50}, {51, 51}, {1, 1}, {2, 2}, {53, 53}, {54, 54}}));
}

TEST(Crossover, ArithmeticFixedPointAndBlend) {
    auto p = numbered(4, 10);
    auto [a, b] = arithmetic_crossover(p, p, 0.5);
    EXPECT_EQ(a, p);
    EXPECT_EQ(b, p);

    auto [c, d] = arithmetic_crossover(chrom({{0, 0}, {10, 10}}), chrom({{4, 8}, {1, 1}, {7, 7}}), 0.25);
    EXPECT_EQ(c.anchors(), (std::vector<Vec2>{{3, 6}, {3.25, 3.25}}));
    EXPECT_EQ(d.anchors(), (std::vector<Vec2>{{1, 2}, {7.75, 7.75}, {7, 7}}));
}

TEST(Crossover, ChildrenRespectLengthBounds) {
    GaConfig cfg;
    cfg.n_min = 3;
    cfg.n_max = 6;
    auto p1 = numbered(3, 0), p2 = numbered(6, 40);
    for (auto mode : {CrossoverMode::one_point, CrossoverMode::two_point, CrossoverMode::arithmetic}) {
        for (std::uint64_t s = 0; s < 300; ++s) {
            auto [a, b] = crossover(p1, p2, mode, cfg, s);
            EXPECT_NO_THROW(a.validate(cfg));
            EXPECT_NO_THROW(b.validate(cfg));
            EXPECT_EQ(a.anchor_count() + b.anchor_count(), 9u);
        }
    }
}

TEST(Mutate, IdentityWhenDisabled) {
    GaConfig cfg;
    cfg.mutation_sigma = 0;
    cfg.length_mutation_rate = 0;
    auto c = numbered(5, 20);
    for (std::uint64_t s = 0; s < 50; ++s) EXPECT_EQ(mutate(c, cfg, s), c);
}

TEST(Mutate, ClampsToField) {
    GaConfig cfg;
    cfg.mutation_sigma = 1e4;
    cfg.length_mutation_rate = 0;
    auto c = chrom({{0, 0}});
    bool hit_zero = false;
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto m = mutate(c, cfg, s);
        for (double g : m.genes) {
            EXPECT_GE(g, 0.0);
            EXPECT_LE(g, 100.0);
            hit_zero = hit_zero || (g == 0.0 && m != c);
        }
    }
    EXPECT_TRUE(hit_zero);
}

TEST(Mutate, LengthChangeRate) {
    GaConfig cfg;
    auto c = numbered(6, 10);
    int changed = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) {
        auto m = mutate(c, cfg, s);
        EXPECT_NO_THROW(m.validate(cfg));
        if (m.anchor_count() != c.anchor_count()) ++changed;
    }
    EXPECT_NEAR(changed / 10000.0, 0.1, 0.01);
}

TEST(RandomChromosome, LengthAndUniformity) {
    GaConfig cfg;
    cfg.n_min = cfg.n_max = 3;
    EXPECT_EQ(random_chromosome(cfg, 1).genes.size(), 6u);

    cfg.n_min = 3;
    cfg.n_max = 9;
    std::vector<int> freq(10, 0);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        auto c = random_chromosome(cfg, s);
        EXPECT_NO_THROW(c.validate(cfg));
        ++freq[c.anchor_count()];
    }
    for (std::size_t n = 3; n <= 9; ++n) EXPECT_NEAR(freq[n] / 1000.0, 1.0 / 7.0, 0.04) << n;
    EXPECT_EQ(random_chromosome(cfg, 42), random_chromosome(cfg, 42));
}

TEST(Chromosome, Validation) {
    GaConfig cfg;
    EXPECT_THROW(chrom({{1, 1}, {2, 2}}).validate(cfg), ArgumentError);
    EXPECT_THROW(chrom({{1, 1}, {2, 2}, {101, 2}}).validate(cfg), BoundsError);
    AnchorChromosome odd;
    odd.genes = {1, 2, 3, 4, 5, 6, 7};
    EXPECT_THROW(odd.validate(cfg), ArgumentError);
}

class SmallFrozen : public ::testing::Test {
protected:
    void SetUp() override {
        frozen.base = build_scenario(50, 50, 15, 25, {}, 12);
        frozen.noise_seed = 5;
        params.particles = 30;
        params.max_iterations = 3;
        config.population = 12;
        config.max_generations = 3;
        config.n_min = 3;
        config.n_max = 8;
        config.field = frozen.base.bounds();
        config.master_seed = 7;
    }
    FrozenScenario frozen;
    NbpParams params;
    GaConfig config;
};

TEST_F(SmallFrozen, EvaluationIsDeterministic) {
    auto c = random_chromosome(config, 3);
    auto a = evaluate_chromosome(c, frozen, params, 1);
    EXPECT_EQ(a, evaluate_chromosome(c, frozen, params, 1));
    EXPECT_EQ(a.anchor_count, c.anchor_count());
    EXPECT_FALSE(a.penalized);
}

TEST_F(SmallFrozen, OutOfFieldChromosomeIsPenalized) {
    auto obj = evaluate_chromosome(chrom({{1, 1}, {2, 2}, {80, 3}}), frozen, params, 1);
    EXPECT_TRUE(obj.penalized);
    EXPECT_DOUBLE_EQ(obj.error_m, frozen.base.bounds().diagonal());
}

TEST_F(SmallFrozen, CoLocatedAnchorsLoseToSpreadOnes) {
    auto clump = chrom({{25, 25}, {25, 25}, {25, 25}});
    auto spread = AnchorChromosome::from_anchors(place_anchors_preset(Placement::edge, 8, config.field, 0));
    params.max_iterations = 6;
    EXPECT_GT(evaluate_chromosome(clump, frozen, params, 1).error_m,
              evaluate_chromosome(spread, frozen, params, 1).error_m);
}

TEST_F(SmallFrozen, ZeroGenerationsKeepsInitialPopulation) {
    config.max_generations = 0;
    auto r = nsga2_run(frozen, params, config);
    EXPECT_EQ(r.generations_run, 0u);
    ASSERT_EQ(r.archive.members.size(), config.population);
    ASSERT_EQ(r.log.size(), 1u);
    for (std::size_t i = 0; i < config.population; ++i) {
        auto c = random_chromosome(config, derive_seed(config.master_seed, {tag("init"), i}));
        bool found = false;
        for (const auto& m : r.archive.members) found = found || m.chromosome == c;
        EXPECT_TRUE(found) << i;
    }
}

TEST_F(SmallFrozen, RunIsDeterministicAndFrontIsConsistent) {
    std::vector<GenerationStats> seen;
    auto a = nsga2_run(frozen, params, config, [&](const GenerationStats& s) { seen.push_back(s); });
    auto b = nsga2_run(frozen, params, config);
    EXPECT_EQ(seen, a.log);
    EXPECT_EQ(a.log, b.log);
    ASSERT_EQ(a.archive.members.size(), b.archive.members.size());
    for (std::size_t i = 0; i < a.archive.members.size(); ++i) {
        EXPECT_EQ(a.archive.members[i].chromosome, b.archive.members[i].chromosome);
        EXPECT_EQ(a.archive.members[i].objectives, b.archive.members[i].objectives);
    }

    auto front = a.archive.front1();
    ASSERT_FALSE(front.empty());
    for (const auto& p : front)
        for (const auto& q : front) EXPECT_FALSE(dominates(p.objectives, q.objectives));
    for (std::size_t i = 1; i < front.size(); ++i) {
        EXPECT_GE(front[i].objectives.anchor_count, front[i - 1].objectives.anchor_count);
        EXPECT_LE(front[i].objectives.error_m, front[i - 1].objectives.error_m);
    }
    for (const auto& m : a.archive.members) EXPECT_NO_THROW(m.chromosome.validate(config));
}

TEST_F(SmallFrozen, WorkerCountDoesNotChangeResults) {
    auto a = nsga2_run(frozen, params, config);
    config.workers = 3;
    auto b = nsga2_run(frozen, params, config);
    EXPECT_EQ(a.log, b.log);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

}  // namespace
}  // namespace wsnloc
