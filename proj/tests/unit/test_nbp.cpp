#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "wsnloc/errors.hpp"
#include "wsnloc/field.hpp"
#include "wsnloc/nbp.hpp"

namespace wsnloc {
namespace {

constexpr double kPi = std::numbers::pi;

ParticleBelief delta_belief(NodeId node, Vec2 at, std::size_t m, double radius) {
    ParticleBelief b;
    b.node = node;
    b.samples.assign(m, at);
    b.weights.assign(m, 1.0 / static_cast<double>(m));
    b.bandwidth = kde_bandwidth(b.samples, b.weights, radius);
    return b;
}

// Reference mixture density written out term by term.
double mixture_pdf(const ParticleSet& s, Vec2 p) {
    const Mat2& c = s.bandwidth;
    const double det = c.xx * c.yy - c.xy * c.xy;
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double dx = p.x - s.samples[i].x;
        const double dy = p.y - s.samples[i].y;
        const double q = (c.yy * dx * dx - 2 * c.xy * dx * dy + c.xx * dy * dy) / det;
        sum += s.weights[i] * std::exp(-0.5 * q) / (2 * kPi * std::sqrt(det));
    }
    return sum;
}

FieldScenario triangle_scenario() {
    FieldScenario s;
    s.width = 20;
    s.height = 20;
    s.radius = 15;
    s.nodes = {{0, {3, 4}, false}, {1, {0, 0}, true}, {2, {10, 0}, true}, {3, {0, 10}, true}};
    return s;
}

TEST(InitBeliefs, AnchorsAreDeltas) {
    FieldScenario s = triangle_scenario();
    s.nodes[1].true_pos = {10, 20};
    NbpParams p;
    auto b = init_beliefs(s, p, 1);
    ASSERT_EQ(b[1].size(), p.particles);
    for (std::size_t i = 0; i < p.particles; ++i) {
        EXPECT_EQ(b[1].samples[i], (Vec2{10, 20}));
        EXPECT_DOUBLE_EQ(b[1].weights[i], 1.0 / static_cast<double>(p.particles));
    }
}

TEST(InitBeliefs, UnknownIsUniform) {
    FieldScenario s;
    s.width = s.height = 100;
    s.radius = 15;
    s.nodes = {{0, {1, 1}, false}, {1, {0, 0}, true}};
    NbpParams p;
    p.particles = 1000;
    auto b = init_beliefs(s, p, 4);
    Vec2 mean;
    for (Vec2 v : b[0].samples) {
        EXPECT_TRUE(s.bounds().contains(v));
        mean = mean + (1.0 / 1000.0) * v;
    }
    EXPECT_NEAR(mean.x, 50, 3);
    EXPECT_NEAR(mean.y, 50, 3);
    EXPECT_EQ(b, init_beliefs(s, p, 4));
}

TEST(PairwisePotential, ClosedForms) {
    MeasurementModel m;
    m.noise_sigma = 1;
    EXPECT_DOUBLE_EQ(pairwise_potential({0, 0}, {0, 0}, 0, m, 15), 1.0);
    EXPECT_NEAR(pairwise_potential({0, 0}, {15, 0}, 15, m, 15), std::exp(-0.5), 1e-12);
    const double d = 6;
    EXPECT_NEAR(pairwise_potential({0, 0}, {d + 1, 0}, d, m, 15),
                std::exp(-0.5) * std::exp(-(d + 1) * (d + 1) / (2 * 225.0)), 1e-12);
}

TEST(PairwisePotential, ZeroNoiseUsesSigmaEval) {
    MeasurementModel m;
    m.noise_sigma = 0;
    EXPECT_NEAR(pairwise_potential({0, 0}, {5.5, 0}, 5, m, 15, 0.5),
                std::exp(-0.5) * std::exp(-30.25 / 450.0), 1e-12);
}

TEST(ProjectMessage, ForcedAngle) {
    auto b = delta_belief(0, {0, 0}, 4, 15);
    std::vector<double> angles(4, kPi / 2);
    std::vector<double> noise(4, 0.0);
    auto msg = project_message(b, 1, 5.0, angles, noise, nullptr, 15);
    for (Vec2 s : msg.samples) {
        EXPECT_NEAR(s.x, 5.0, 1e-12);
        EXPECT_NEAR(s.y, 0.0, 1e-12);
    }
}

TEST(DrawMessage, RingFromAnchorIsUniform) {
    const std::size_t m = 10000;
    auto b = delta_belief(0, {0, 0}, m, 15);
    MeasurementModel model;
    model.noise_sigma = 0;
    Rng rng(2024);
    auto msg = draw_message(b, 1, 5.0, model, nullptr, 15, rng);
    std::vector<double> bins(36, 0.0);
    for (Vec2 s : msg.samples) {
        EXPECT_LT(std::abs(norm(s) - 5.0), 1e-9);
        double a = std::atan2(s.y, s.x);
        if (a < 0) a += 2 * kPi;
        bins[std::min<std::size_t>(35, static_cast<std::size_t>(a / (2 * kPi) * 36))] += 1;
    }
    const double expect = static_cast<double>(m) / 36.0;
    double chi2 = 0;
    for (double c : bins) chi2 += (c - expect) * (c - expect) / expect;
    EXPECT_LT(chi2, 57.342);  // chi-square critical value, 35 dof, alpha 0.01

    // connectivity is constant on the circle, so weights stay equal
    for (double w : msg.weights) EXPECT_NEAR(w, 1.0 / static_cast<double>(m), 1e-15);
}

TEST(DrawMessage, SamplesSitOnTheirAnnulus) {
    ParticleBelief b;
    b.node = 3;
    Rng init(5);
    std::uniform_real_distribution<double> u(0, 100);
    for (int i = 0; i < 500; ++i) {
        b.samples.push_back({u(init), u(init)});
        b.weights.push_back(1.0 / 500);
    }
    b.bandwidth = kde_bandwidth(b.samples, b.weights, 15);
    MeasurementModel model;
    model.noise_sigma = 1.5;
    Rng rng(77);
    auto msg = draw_message(b, 4, 8.0, model, nullptr, 15, rng);
    ASSERT_EQ(msg.sources.size(), msg.samples.size());
    double wsum = 0;
    for (std::size_t i = 0; i < msg.size(); ++i) {
        EXPECT_NEAR(distance(msg.samples[i], msg.sources[i]), 8.0 + msg.noise[i], 1e-9);
        EXPECT_GE(msg.weights[i], 0.0);
        wsum += msg.weights[i];
    }
    EXPECT_NEAR(wsum, 1.0, 1e-12);
}

TEST(ProjectMessage, DividesByReverseDensity) {
    ParticleBelief b;
    b.node = 0;
    b.samples = {{0, 0}, {4, 0}};
    b.weights = {0.5, 0.5};
    b.bandwidth = Mat2::identity(1.0);
    ParticleMessage rev;
    rev.samples = {{0, 0}};
    rev.weights = {1.0};
    rev.bandwidth = Mat2::identity(1.0);
    std::vector<double> angles{0.0, 0.0};
    std::vector<double> noise{0.0, 0.0};
    auto msg = project_message(b, 1, 3.0, angles, noise, &rev, 15);
    // equal connectivity; weights scale with 1 / reverse density at the source
    const double r0 = 1.0 / (2 * kPi);
    const double r1 = r0 * std::exp(-8.0);
    EXPECT_NEAR(msg.weights[1] / msg.weights[0], r0 / r1, 1e-6 * r0 / r1);
}

TEST(Kde, ClosedForms) {
    ParticleSet s;
    s.samples = {{0, 0}};
    s.weights = {1.0};
    s.bandwidth = Mat2::identity(1.0);
    EXPECT_NEAR(kde_eval(s, {0, 0}), 1.0 / (2 * kPi), 1e-12);
    EXPECT_NEAR(kde_eval(s, {1, 0}), std::exp(-0.5) / (2 * kPi), 1e-12);

    ParticleSet two;
    two.samples = {{-1, 0}, {1, 0}};
    two.weights = {0.5, 0.5};
    two.bandwidth = Mat2::identity(1.0);
    EXPECT_NEAR(kde_eval(two, {0, 0}), kde_eval(s, {1, 0}), 1e-12);
}

TEST(Kde, MatchesReferenceAndLogForm) {
    ParticleSet s;
    Rng rng(3);
    std::uniform_real_distribution<double> u(0, 10);
    for (int i = 0; i < 50; ++i) {
        s.samples.push_back({u(rng), u(rng)});
        s.weights.push_back(u(rng) + 0.1);
    }
    double total = 0;
    for (double w : s.weights) total += w;
    for (double& w : s.weights) w /= total;
    s.bandwidth = {2.0, 0.4, 1.5};
    Kde kde(s);
    for (Vec2 p : {Vec2{0, 0}, Vec2{5, 5}, Vec2{12, -3}}) {
        const double ref = mixture_pdf(s, p);
        EXPECT_NEAR(kde(p), ref, 1e-12 * std::max(1.0, ref));
        EXPECT_NEAR(kde.log_density(p), std::log(ref), 1e-9);
    }
    EXPECT_TRUE(std::isfinite(kde.log_density({1e4, 1e4})));
}

TEST(KdeBandwidth, ScaledWeightedCovariance) {
    std::vector<Vec2> pts{{0, 0}, {2, 0}, {0, 4}, {3, 3}, {1, 5}, {6, 2}, {4, 4}, {2, 2}};
    std::vector<double> w{1, 2, 1, 3, 1, 1, 2, 1};
    double ws = 0, mx = 0, my = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ws += w[i];
        mx += w[i] * pts[i].x;
        my += w[i] * pts[i].y;
    }
    mx /= ws;
    my /= ws;
    double cxx = 0, cxy = 0, cyy = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        cxx += w[i] * (pts[i].x - mx) * (pts[i].x - mx);
        cxy += w[i] * (pts[i].x - mx) * (pts[i].y - my);
        cyy += w[i] * (pts[i].y - my) * (pts[i].y - my);
    }
    const double f = 0.5 / ws;  // 8^(-1/3) = 1/2
    Mat2 bw = kde_bandwidth(pts, w, 15);
    EXPECT_NEAR(bw.xx, f * cxx, 1e-12);
    EXPECT_NEAR(bw.xy, f * cxy, 1e-12);
    EXPECT_NEAR(bw.yy, f * cyy, 1e-12);
}

TEST(KdeBandwidth, SingularGetsRegularized) {
    std::vector<Vec2> same(10, Vec2{3, 3});
    std::vector<double> w(10, 0.1);
    Mat2 bw = kde_bandwidth(same, w, 15);
    EXPECT_NEAR(bw.xx, 1e-6 * 225, 1e-15);
    EXPECT_NEAR(bw.yy, 1e-6 * 225, 1e-15);
    EXPECT_NEAR(bw.xy, 0.0, 1e-18);

    std::vector<Vec2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    std::vector<double> w4(4, 0.25);
    EXPECT_GT(kde_bandwidth(line, w4, 15).det(), 0.0);
}

TEST(UpdateBelief, SingleMessageIsReproduced) {
    const std::size_t m = 2000;
    auto anchor = delta_belief(9, {50, 50}, m, 15);
    MeasurementModel model;
    model.noise_sigma = 1;
    Rng rng(8);
    auto msg = draw_message(anchor, 0, 10.0, model, nullptr, 15, rng);
    NbpParams p;
    p.particles = m;
    const ParticleMessage* in[] = {&msg};
    Rng rng2(9);
    auto upd = update_belief(0, FieldPrior{field_box(100, 100)}, in, p, 15, rng2);
    ASSERT_FALSE(upd.fell_back);

    // KL(message || belief) by Monte Carlo over message draws
    Kde pk(msg), qk(upd.belief);
    ParticleBelief as_belief;
    static_cast<ParticleSet&>(as_belief) = msg;
    Rng rng3(10);
    auto draws = sample_belief(as_belief, rng3);
    double kl = 0;
    for (Vec2 x : draws.samples) kl += pk.log_density(x) - qk.log_density(x);
    kl /= static_cast<double>(m);
    EXPECT_LT(kl, 0.1);
}

TEST(UpdateBelief, TwoCirclesThenThird) {
    const std::size_t m = 1000;
    MeasurementModel model;
    model.noise_sigma = 0.3;
    const double r = std::sqrt(41.0);  // circles meet at (5, 4) and (5, -4)
    Rng rng(21);
    auto a = draw_message(delta_belief(1, {0, 0}, m, 15), 0, r, model, nullptr, 15, rng);
    auto b = draw_message(delta_belief(2, {10, 0}, m, 15), 0, r, model, nullptr, 15, rng);
    auto c = draw_message(delta_belief(3, {0, 10}, m, 15), 0, std::sqrt(61.0), model, nullptr, 15, rng);
    NbpParams p;
    p.particles = m;
    FieldPrior prior{Box{-20, -20, 30, 20}};

    const ParticleMessage* two[] = {&a, &b};
    auto upd = update_belief(0, prior, two, p, 15, rng).belief;
    double upper = 0, lower = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (distance(upd.samples[i], {5, 4}) < 4) upper += upd.weights[i];
        if (distance(upd.samples[i], {5, -4}) < 4) lower += upd.weights[i];
    }
    EXPECT_GT(upper, 0.3);
    EXPECT_GT(lower, 0.3);
    EXPECT_GT(upper + lower, 0.9);

    const ParticleMessage* three[] = {&a, &b, &c};
    auto resolved = update_belief(0, prior, three, p, 15, rng).belief;
    Vec2 est = estimate_position(resolved, Estimator::weighted_mean);
    EXPECT_LT(distance(est, {5, 4}), 1.0);
}

TEST(UpdateBelief, AnchorsAreRejected) {
    FieldScenario s = triangle_scenario();
    Rng draw(1);
    auto msg = draw_message(delta_belief(1, {0, 0}, 50, 15), 0, 5, MeasurementModel{}, nullptr, 15, draw);
    const ParticleMessage* in[] = {&msg};
    NbpParams p;
    p.particles = 50;
    Rng rng(1);
    EXPECT_THROW(update_belief(s, 2, in, p, rng), ArgumentError);
    EXPECT_NO_THROW(update_belief(s, 0, in, p, rng));
}

TEST(UpdateBelief, MessagesOutsideTheFieldFallBack) {
    const std::size_t m = 100;
    MeasurementModel model;
    model.noise_sigma = 0.01;
    Rng rng(4);
    // both rings sit beyond the field, so every proposal has zero prior
    auto a = draw_message(delta_belief(1, {-20, -20}, m, 15), 0, 1, model, nullptr, 15, rng);
    auto b = draw_message(delta_belief(2, {-20, -22}, m, 15), 0, 1, model, nullptr, 15, rng);
    const ParticleMessage* in[] = {&a, &b};
    NbpParams p;
    p.particles = m;
    auto upd = update_belief(0, FieldPrior{field_box(100, 100)}, in, p, 15, rng);
    EXPECT_TRUE(upd.fell_back);
    for (Vec2 v : upd.belief.samples) EXPECT_TRUE(field_box(100, 100).contains(v));
}

TEST(EstimatePosition, MapExamples) {
    auto anchor = delta_belief(0, {10, 20}, 30, 15);
    EXPECT_EQ(estimate_position(anchor, Estimator::map), (Vec2{10, 20}));

    ParticleSet s;
    s.samples.assign(9, Vec2{0, 0});
    s.samples.push_back({100, 100});
    s.weights.assign(10, 0.1);
    s.bandwidth = kde_bandwidth(s.samples, s.weights, 15);
    EXPECT_EQ(estimate_position(s, Estimator::map), (Vec2{0, 0}));
}

TEST(EstimatePosition, MapIsArgmaxOverSamples) {
    FieldScenario s = triangle_scenario();
    MeasurementModel model;
    model.noise_sigma = 0;
    auto g = measure_ranges(s, model, 0);
    NbpParams p;
    p.particles = 200;
    std::vector<ParticleBelief> last;
    run_nbp(s, g, model, p, 5, [&](std::size_t, std::span<const ParticleBelief> b) {
        last.assign(b.begin(), b.end());
    });
    const auto& belief = last[0];
    std::size_t best = 0;
    for (std::size_t i = 1; i < belief.size(); ++i)
        if (mixture_pdf(belief, belief.samples[i]) > mixture_pdf(belief, belief.samples[best])) best = i;
    EXPECT_EQ(estimate_position(belief, Estimator::map), belief.samples[best]);
}

TEST(RunNbp, Trilateration) {
    FieldScenario s = triangle_scenario();
    MeasurementModel model;
    model.noise_sigma = 0;
    auto g = measure_ranges(s, model, 0);
    NbpParams p;
    p.particles = 300;
    auto r = run_nbp(s, g, model, p, 17);
    EXPECT_LE(r.iterations_run, 10u);
    EXPECT_LT(distance(r.estimates[0], {3, 4}), 1.0);
    EXPECT_FALSE(r.flagged[0]);
}

TEST(RunNbp, ErrorTrendsDownOnTheTriangle) {
    FieldScenario s = triangle_scenario();
    MeasurementModel model;
    model.noise_sigma = 0;
    auto g = measure_ranges(s, model, 0);
    NbpParams p;
    p.particles = 300;
    p.convergence_shift = 1e-9;  // run every iteration
    const std::size_t seeds = 20;
    std::vector<std::vector<double>> hist;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        auto r = run_nbp(s, g, model, p, seed);
        ASSERT_EQ(r.error_history.size(), p.max_iterations);
        hist.push_back(r.error_history);
    }
    // Every neighbour is an anchor, so iteration 1 already sees all the
    // information; later iterations may only match it up to Monte Carlo noise.
    for (std::size_t k = 3; k + 1 < p.max_iterations; ++k) {
        double mean = 0, sq = 0;
        for (const auto& h : hist) mean += (h[k] - h[0]) / seeds;
        for (const auto& h : hist) sq += (h[k] - h[0] - mean) * (h[k] - h[0] - mean);
        const double se = std::sqrt(sq / (seeds - 1) / seeds);
        EXPECT_LE(mean, 2.0 * se) << "iteration " << k + 1;
    }
}

TEST(RunNbp, IsolatedUnknownIsFlagged) {
    FieldScenario s;
    s.width = s.height = 100;
    s.radius = 15;
    s.nodes = {{0, {90, 90}, false}, {1, {5, 5}, true}};
    MeasurementModel model;
    auto g = measure_ranges(s, model, 0);
    auto r = run_nbp(s, g, model, NbpParams{}, 1);
    EXPECT_TRUE(r.flagged[0]);
    EXPECT_LT(distance(r.estimates[0], {50, 50}), 5.0);
    EXPECT_NEAR(r.per_node_error[0], distance(r.estimates[0], {90, 90}), 1e-12);
}

TEST(RunNbp, NeedsAnAnchor) {
    FieldScenario s;
    s.width = s.height = 100;
    s.radius = 15;
    s.nodes = {{0, {1, 1}, false}, {1, {5, 5}, false}};
    MeasurementModel model;
    auto g = measure_ranges(s, model, 0);
    EXPECT_THROW(run_nbp(s, g, model, NbpParams{}, 1), ConfigurationError);
}

class DefaultScenario : public ::testing::Test {
protected:
    void SetUp() override {
        auto anchors = place_anchors_preset(Placement::edge, 9, field_box(100, 100), 0);
        scenario = build_scenario(100, 100, 15, 100, anchors, 5);
        ranges = measure_ranges(scenario, model, 6);
        params.particles = 40;
        params.max_iterations = 4;
    }
    FieldScenario scenario;
    MeasurementModel model;
    RangeGraph ranges;
    NbpParams params;
};

TEST_F(DefaultScenario, WorkerCountDoesNotChangeResults) {
    auto a = run_nbp(scenario, ranges, model, params, 3);
    params.workers = 3;
    auto b = run_nbp(scenario, ranges, model, params, 3);
    EXPECT_EQ(a.estimates, b.estimates);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.error_history, b.error_history);
}

TEST_F(DefaultScenario, AnchorBeliefsNeverMove) {
    run_nbp(scenario, ranges, model, params, 3, [&](std::size_t, std::span<const ParticleBelief> beliefs) {
        for (const auto& n : scenario.nodes) {
            if (!n.is_anchor) continue;
            for (Vec2 v : beliefs[n.id].samples) ASSERT_EQ(v, n.true_pos);
        }
    });
}

TEST_F(DefaultScenario, TraceCountsEveryDirectedEdge) {
    auto r = run_nbp(scenario, ranges, model, params, 3);
    EXPECT_EQ(r.trace.total_sent(), 2 * ranges.edges().size() * r.iterations_run);
    EXPECT_EQ(r.trace.total_sent(), r.trace.total_received());
    EXPECT_EQ(r.error_history.size(), r.iterations_run);
}

TEST(MeanError, Arithmetic) {
    LocalizationResult r;
    r.is_anchor = {false, false, true};
    r.per_node_error = {2.0, 4.0, 0.0};
    EXPECT_DOUBLE_EQ(mean_error(r), 3.0);
    r.per_node_error = {0.0, 0.0, 0.0};
    EXPECT_DOUBLE_EQ(mean_error(r), 0.0);
    r.is_anchor = {true, true, true};
    EXPECT_THROW(mean_error(r), ArgumentError);
}

}  // namespace
}  // namespace wsnloc
