#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wsnloc/field.hpp"
#include "wsnloc/geometry.hpp"
#include "wsnloc/random.hpp"
#include "wsnloc/trace.hpp"

namespace wsnloc {

enum class Estimator { map, weighted_mean };

struct NbpParams {
    std::size_t particles = 100;
    std::size_t max_iterations = 10;
    double convergence_shift = 0.1;  // meters
    double weight_floor_eps = 1e-8;
    /// Absolute floor on the reverse-message density in the message weight.
    double reverse_density_floor = 1e-12;
    /// Bandwidth used for the range likelihood when noise_sigma is 0.
    double sigma_eval = 0.5;
    Estimator estimator = Estimator::weighted_mean;
    std::size_t workers = 1;
    StepTable steps;

    void validate() const;
};

/// Weighted 2D samples with a shared Gaussian kernel covariance.
struct ParticleSet {
    std::vector<Vec2> samples;
    std::vector<double> weights;
    Mat2 bandwidth;

    std::size_t size() const { return samples.size(); }

    friend bool operator==(const ParticleSet&, const ParticleSet&) = default;
};

struct ParticleBelief : ParticleSet {
    NodeId node = 0;

    friend bool operator==(const ParticleBelief&, const ParticleBelief&) = default;
};

struct ParticleMessage : ParticleSet {
    NodeId from = 0;
    NodeId to = 0;
    std::vector<Vec2> sources;   // x_t^(i), the belief draws each sample was projected from
    std::vector<double> angles;  // theta_i
    std::vector<double> noise;   // v_i, so |m_i - sources_i| = d + v_i
};

/// Uniform position prior over the field rectangle.
struct FieldPrior {
    Box field;
    double density(Vec2 p) const { return field.contains(p) ? 1.0 / field.area() : 0.0; }
};

/// Kernel density estimate of a particle set. Build once, evaluate many times.
class Kde {
public:
    explicit Kde(const ParticleSet& set);
    double operator()(Vec2 p) const;
    /// log of operator(), computed with log-sum-exp so far-away points stay finite.
    double log_density(Vec2 p) const;

    const Gaussian2& kernel() const { return kernel_; }

private:
    const ParticleSet* set_;
    Gaussian2 kernel_;
};

double kde_eval(const ParticleSet& set, Vec2 point);

/// Weighted covariance of `samples` scaled by M^(-1/3). Adds 1e-6 R^2 I
/// when the covariance is singular (e.g. collinear or coincident samples).
Mat2 kde_bandwidth(std::span<const Vec2> samples, std::span<const double> weights, double radius);

/// Indexed by node id. Anchors get a delta at their position, unknowns M
/// uniform samples over the field.
std::vector<ParticleBelief> init_beliefs(const FieldScenario& scenario, const NbpParams& params,
                                              std::uint64_t seed);

/// Range likelihood times the connectivity prior.
double pairwise_potential(Vec2 x_t, Vec2 x_u, double d_tu, const MeasurementModel& model,
                          double radius, double sigma_eval = 0.5);

/// M draws from the belief density (its KDE), returned with uniform weights.
/// Point-mass beliefs (anchors) are returned unchanged.
ParticleBelief sample_belief(const ParticleBelief& belief, Rng& rng);

/// Builds m_tu by projecting each weighted sample of `belief` onto a circle
/// of radius d_tu + noise[i] at angles[i]; the weight is the connectivity
/// prior times the sample weight over the reverse message density.
ParticleMessage project_message(const ParticleBelief& belief, NodeId to, double d_tu,
                                std::span<const double> angles, std::span<const double> noise,
                                const ParticleMessage* reverse, double radius,
                                double reverse_density_floor = 1e-12);

/// Draws M source points from the belief, fresh angles (uniform on [0, 2 pi))
/// and range noise, then projects.
ParticleMessage draw_message(const ParticleBelief& belief, NodeId to, double d_tu,
                             const MeasurementModel& model, const ParticleMessage* reverse,
                             double radius, Rng& rng, double reverse_density_floor = 1e-12);

struct BeliefUpdate {
    ParticleBelief belief;
    bool fell_back = false;  // every candidate weight was degenerate
};

/// Mixture importance sampling from the product of incoming messages.
BeliefUpdate update_belief(NodeId node, const FieldPrior& prior,
                           std::span<const ParticleMessage* const> incoming, const NbpParams& params,
                           double radius, Rng& rng);

/// Same, for node `node` of `scenario`; throws ArgumentError for anchors,
/// whose beliefs are fixed.
BeliefUpdate update_belief(const FieldScenario& scenario, NodeId node,
                           std::span<const ParticleMessage* const> incoming, const NbpParams& params, Rng& rng);

Vec2 estimate_position(const ParticleSet& belief, Estimator estimator = Estimator::map);

struct LocalizationResult {
    std::vector<Vec2> estimates;        // indexed by node id
    std::vector<double> per_node_error; // 0 for anchors
    std::vector<bool> is_anchor;
    std::vector<bool> flagged;          // disconnected / not localizable
    std::size_t iterations_run = 0;
    std::vector<double> error_history;  // mean unknown-node error after each iteration
    MessageTrace trace;
};

/// Invoked after each iteration with the current beliefs (indexed by node id).
using BeliefObserver = std::function<void(std::size_t iteration, std::span<const ParticleBelief>)>;

LocalizationResult run_nbp(const FieldScenario& scenario, const RangeGraph& ranges,
                           const MeasurementModel& model, const NbpParams& params, std::uint64_t seed,
                           const BeliefObserver& observer = {});

/// Mean Euclidean error over non-anchor nodes. Throws ArgumentError when
/// there are none.
double mean_error(const LocalizationResult& result);

}  // namespace wsnloc
