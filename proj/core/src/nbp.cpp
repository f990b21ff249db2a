#include "wsnloc/nbp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "wsnloc/errors.hpp"
#include "wsnloc/parallel.hpp"

namespace wsnloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void normalize(std::vector<double>& w, NodeId node, const char* what) {
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(sum > 0.0) || !std::isfinite(sum)) throw NumericalError(node, std::string(what) + ": degenerate weights");
    for (double& x : w) x /= sum;
}

// Index into a discrete distribution given its running sum.
std::size_t draw_index(std::span<const double> cumulative, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, cumulative.back());
    const double r = u(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

ParticleBelief uniform_belief(NodeId node, const Box& field, std::size_t m, double radius, Rng& rng) {
    ParticleBelief b;
    b.node = node;
    b.samples.reserve(m);
    std::uniform_real_distribution<double> ux(field.xmin, field.xmax);
    std::uniform_real_distribution<double> uy(field.ymin, field.ymax);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        b.samples.push_back({x, y});
    }
    b.weights.assign(m, 1.0 / static_cast<double>(m));
    b.bandwidth = kde_bandwidth(b.samples, b.weights, radius);
    return b;
}

}  // namespace

void NbpParams::validate() const {
    if (particles < 10) throw ArgumentError("particles must be >= 10");
    if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
    if (!(convergence_shift > 0.0)) throw ArgumentError("convergence_shift must be > 0");
    if (!(weight_floor_eps > 0.0 && weight_floor_eps < 1.0))
        throw ArgumentError("weight_floor_eps must lie in (0, 1)");
    if (!(reverse_density_floor > 0.0)) throw ArgumentError("reverse_density_floor must be > 0");
    if (!(sigma_eval > 0.0)) throw ArgumentError("sigma_eval must be > 0");
}

Kde::Kde(const ParticleSet& set) : set_(&set), kernel_(set.bandwidth) {}

double Kde::operator()(Vec2 p) const {
    const auto& s = set_->samples;
    const auto& w = set_->weights;
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (w[i] == 0.0) continue;
        sum += w[i] * kernel_.pdf(p - s[i]);
    }
    return sum;
}

double Kde::log_density(Vec2 p) const {
    const auto& s = set_->samples;
    const auto& w = set_->weights;
    double q_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (w[i] > 0.0) q_min = std::min(q_min, kernel_.mahalanobis2(p - s[i]));
    if (!std::isfinite(q_min)) return -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (w[i] > 0.0) sum += w[i] * std::exp(-0.5 * (kernel_.mahalanobis2(p - s[i]) - q_min));
    return kernel_.log_norm() - 0.5 * q_min + std::log(sum);
}

double kde_eval(const ParticleSet& set, Vec2 point) { return Kde(set)(point); }

Mat2 kde_bandwidth(std::span<const Vec2> samples, std::span<const double> weights, double radius) {
    const std::size_t m = samples.size();
    if (m == 0 || weights.size() != m) throw ArgumentError("bandwidth needs matching samples and weights");
    double wsum = 0.0;
    Vec2 mean;
    for (std::size_t i = 0; i < m; ++i) {
        wsum += weights[i];
        mean = mean + weights[i] * samples[i];
    }
    if (!(wsum > 0.0)) throw ArgumentError("bandwidth needs positive total weight");
    mean = (1.0 / wsum) * mean;
    Mat2 cov;
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 d = samples[i] - mean;
        cov = cov + weights[i] * Mat2{d.x * d.x, d.x * d.y, d.y * d.y};
    }
    cov = (1.0 / wsum) * cov;
    Mat2 bw = std::pow(static_cast<double>(m), -1.0 / 3.0) * cov;
    const double tr = bw.trace();
    if (!(tr > 0.0) || bw.det() <= 1e-10 * tr * tr) bw = bw + Mat2::identity(1e-6 * radius * radius);
    return bw;
}

std::vector<ParticleBelief> init_beliefs(const FieldScenario& scenario, const NbpParams& params,
                                         std::uint64_t seed) {
    params.validate();
    const std::size_t m = params.particles;
    std::vector<ParticleBelief> beliefs;
    beliefs.reserve(scenario.size());
    for (const auto& n : scenario.nodes) {
        if (n.is_anchor) {
            ParticleBelief b;
            b.node = n.id;
            b.samples.assign(m, n.true_pos);
            b.weights.assign(m, 1.0 / static_cast<double>(m));
            b.bandwidth = kde_bandwidth(b.samples, b.weights, scenario.radius);
            beliefs.push_back(std::move(b));
        } else {
            Rng rng = make_stream(seed, {tag("init"), n.id});
            beliefs.push_back(uniform_belief(n.id, scenario.bounds(), m, scenario.radius, rng));
        }
    }
    return beliefs;
}

double pairwise_potential(Vec2 x_t, Vec2 x_u, double d_tu, const MeasurementModel& model,
                          double radius, double sigma_eval) {
    if (d_tu < 0.0) throw ArgumentError("measured distance must be >= 0");
    const double sigma = model.noise_sigma > 0.0 ? model.noise_sigma : sigma_eval;
    const double r = distance(x_t, x_u) - d_tu;
    return std::exp(-(r * r) / (2.0 * sigma * sigma)) * connectivity_prob(x_t, x_u, radius);
}

ParticleMessage project_message(const ParticleBelief& belief, NodeId to, double d_tu,
                                std::span<const double> angles, std::span<const double> noise,
                                const ParticleMessage* reverse, double radius,
                                double reverse_density_floor) {
    const std::size_t m = belief.size();
    if (angles.size() != m || noise.size() != m) throw ArgumentError("need one angle and noise draw per sample");
    ParticleMessage msg;
    msg.from = belief.node;
    msg.to = to;
    msg.sources = belief.samples;
    msg.angles.assign(angles.begin(), angles.end());
    msg.noise.assign(noise.begin(), noise.end());
    msg.samples.resize(m);
    msg.weights.resize(m);

    std::optional<Kde> reverse_kde;
    if (reverse) reverse_kde.emplace(*reverse);

    std::vector<double> rev(m, 1.0);
    if (reverse_kde)
        for (std::size_t i = 0; i < m; ++i)
            rev[i] = std::max((*reverse_kde)(belief.samples[i]), reverse_density_floor);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 x = belief.samples[i];
        const double r = d_tu + noise[i];
        // [sin; cos] component order.
        msg.samples[i] = {x.x + r * std::sin(angles[i]), x.y + r * std::cos(angles[i])};
        double w = connectivity_prob(x, msg.samples[i], radius) * belief.weights[i];
        w /= rev[i];
        msg.weights[i] = w;
    }
    normalize(msg.weights, belief.node, "message weights");
    msg.bandwidth = kde_bandwidth(msg.samples, msg.weights, radius);
    return msg;
}

ParticleBelief sample_belief(const ParticleBelief& belief, Rng& rng) {
    const std::size_t m = belief.size();
    ParticleBelief out;
    out.node = belief.node;
    out.bandwidth = belief.bandwidth;
    out.weights.assign(m, 1.0 / static_cast<double>(m));
    const bool point_mass = std::all_of(belief.samples.begin(), belief.samples.end(),
                                        [&](Vec2 s) { return s == belief.samples.front(); });
    if (point_mass) {
        out.samples = belief.samples;
        return out;
    }
    std::vector<double> cumulative(m);
    std::partial_sum(belief.weights.begin(), belief.weights.end(), cumulative.begin());
    const Gaussian2 kernel(belief.bandwidth);
    std::normal_distribution<double> gauss(0.0, 1.0);
    out.samples.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = draw_index(cumulative, rng);
        const double z1 = gauss(rng);
        const double z2 = gauss(rng);
        out.samples[i] = belief.samples[j] + kernel.transform({z1, z2});
    }
    return out;
}

ParticleMessage draw_message(const ParticleBelief& belief, NodeId to, double d_tu,
                             const MeasurementModel& model, const ParticleMessage* reverse,
                             double radius, Rng& rng, double reverse_density_floor) {
    const ParticleBelief sources = sample_belief(belief, rng);
    const std::size_t m = sources.size();
    std::vector<double> angles(m);
    std::vector<double> noise(m, 0.0);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (double& a : angles) a = angle(rng);
    if (model.noise_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, model.noise_sigma);
        for (double& v : noise) v = gauss(rng);
    }
    return project_message(sources, to, d_tu, angles, noise, reverse, radius, reverse_density_floor);
}

BeliefUpdate update_belief(NodeId node, const FieldPrior& prior,
                           std::span<const ParticleMessage* const> incoming, const NbpParams& params,
                           double radius, Rng& rng) {
    if (incoming.empty()) throw ArgumentError("update_belief needs at least one incoming message");
    const std::size_t m = params.particles;
    const std::size_t k = incoming.size();

    std::vector<Kde> kdes;
    std::vector<std::vector<double>> cumulative(k);
    kdes.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        kdes.emplace_back(*incoming[j]);
        const auto& w = incoming[j]->weights;
        cumulative[j].resize(w.size());
        std::partial_sum(w.begin(), w.end(), cumulative[j].begin());
    }

    const Box support = prior.field.padded(radius);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> offset_dist(0, k - 1);
    const std::size_t offset = offset_dist(rng);

    ParticleBelief out;
    out.node = node;
    out.samples.resize(m);
    std::vector<double> log_w(m);
    std::vector<double> dens(k);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    double max_lw = neg_inf;
    for (std::size_t i = 0; i < m; ++i) {
        // Stratified over the equal-weight message mixture.
        const std::size_t src = (i + offset) % k;
        const std::size_t comp = draw_index(cumulative[src], rng);
        const double z1 = gauss(rng);
        const double z2 = gauss(rng);
        Vec2 x = incoming[src]->samples[comp] + kdes[src].kernel().transform({z1, z2});
        x = support.clamp(x);
        out.samples[i] = x;

        const double p = prior.density(x);
        double lw = neg_inf;
        if (p > 0.0) {
            double log_product = 0.0;
            double log_max = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                dens[j] = kdes[j].log_density(x);
                log_product += dens[j];
                log_max = std::max(log_max, dens[j]);
            }
            double mix = 0.0;
            for (std::size_t j = 0; j < k; ++j) mix += std::exp(dens[j] - log_max);
            const double log_proposal = log_max + std::log(mix / static_cast<double>(k));
            if (std::isfinite(log_product)) lw = log_product + std::log(p) - log_proposal;
        }
        log_w[i] = lw;
        if (lw > max_lw) max_lw = lw;
    }

    if (!std::isfinite(max_lw)) {
        std::clog << "wsnloc: warning: node " << node
                  << " received only degenerate messages; resetting to the uniform prior\n";
        return {uniform_belief(node, prior.field, m, radius, rng), true};
    }

    out.weights.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double w = std::isfinite(log_w[i]) ? std::exp(log_w[i] - max_lw) : 0.0;
        out.weights[i] = std::max(w, params.weight_floor_eps);
    }
    normalize(out.weights, node, "belief weights");
    out.bandwidth = kde_bandwidth(out.samples, out.weights, radius);
    return {std::move(out), false};
}

BeliefUpdate update_belief(const FieldScenario& scenario, NodeId node,
                           std::span<const ParticleMessage* const> incoming, const NbpParams& params, Rng& rng) {
    if (scenario.node(node).is_anchor)
        throw ArgumentError("node " + std::to_string(node) + " is an anchor; anchor beliefs never update");
    return update_belief(node, FieldPrior{scenario.bounds()}, incoming, params, scenario.radius, rng);
}

Vec2 estimate_position(const ParticleSet& belief, Estimator estimator) {
    if (belief.samples.empty()) throw ArgumentError("empty belief");
    if (estimator == Estimator::weighted_mean) {
        Vec2 mean;
        double wsum = 0.0;
        for (std::size_t i = 0; i < belief.size(); ++i) {
            mean = mean + belief.weights[i] * belief.samples[i];
            wsum += belief.weights[i];
        }
        return (1.0 / wsum) * mean;
    }
    const Kde kde(belief);
    std::size_t best = 0;
    double best_density = -1.0;
    for (std::size_t i = 0; i < belief.size(); ++i) {
        const double d = kde(belief.samples[i]);
        if (d > best_density) {
            best_density = d;
            best = i;
        }
    }
    return belief.samples[best];
}

LocalizationResult run_nbp(const FieldScenario& scenario, const RangeGraph& ranges,
                           const MeasurementModel& model, const NbpParams& params, std::uint64_t seed,
                           const BeliefObserver& observer) {
    params.validate();
    scenario.validate();
    model.validate();
    if (scenario.anchor_count() == 0) throw ConfigurationError("localization needs at least one anchor");
    if (ranges.node_count() != scenario.size())
        throw ArgumentError("range graph does not match the scenario");

    const std::size_t n = scenario.size();
    const std::size_t m = params.particles;
    const double radius = scenario.radius;
    const FieldPrior prior{scenario.bounds()};
    const Vec2 center = prior.field.center();

    std::vector<ParticleBelief> beliefs = init_beliefs(scenario, params, seed);

    // Directed edge 2e is t->u, 2e+1 is u->t, so the reverse of d is d^1.
    struct Directed {
        NodeId from;
        NodeId to;
        double distance;
    };
    std::vector<Directed> directed;
    for (const auto& e : ranges.edges()) {
        directed.push_back({e.t, e.u, e.distance});
        directed.push_back({e.u, e.t, e.distance});
    }
    // Incoming directed-edge indices per node, ascending sender id.
    std::vector<std::vector<std::size_t>> incoming(n);
    for (std::size_t d = 0; d < directed.size(); ++d) incoming[directed[d].to].push_back(d);
    for (auto& in : incoming)
        std::sort(in.begin(), in.end(), [&](std::size_t a, std::size_t b) { return directed[a].from < directed[b].from; });

    // A node's outgoing messages stay at 1 (not built) until its belief holds
    // information that traces back to an anchor; before that the belief is the
    // prior, and its ring-blurred messages only drag neighbours to the centre.
    std::vector<char> informed(n, 0);
    for (const auto& node : scenario.nodes) informed[node.id] = node.is_anchor ? 1 : 0;

    LocalizationResult result;
    result.is_anchor.resize(n);
    result.flagged.assign(n, false);
    result.estimates.resize(n);
    result.per_node_error.assign(n, 0.0);
    for (const auto& node : scenario.nodes) {
        result.is_anchor[node.id] = node.is_anchor;
        result.estimates[node.id] = node.is_anchor ? node.true_pos : center;
    }
    result.trace.node_count = n;

    std::vector<std::optional<ParticleMessage>> previous(directed.size());
    std::vector<std::optional<ParticleMessage>> current(directed.size());
    std::vector<Vec2> prev_estimates = result.estimates;

    for (std::size_t it = 1; it <= params.max_iterations; ++it) {
        // Messages into anchors are counted but never built: an anchor's belief
        // is fixed, and dividing by a reverse density evaluated at a single
        // point is a constant that normalization removes.
        std::vector<std::size_t> computed;
        for (std::size_t d = 0; d < directed.size(); ++d)
            if (informed[directed[d].from] && !scenario.nodes[directed[d].to].is_anchor) computed.push_back(d);
        for (auto& msg : current) msg.reset();
        parallel_for(computed.size(), params.workers, [&](std::size_t c) {
            const std::size_t d = computed[c];
            const auto& edge = directed[d];
            Rng rng = make_stream(seed, {tag("message"), edge.from, edge.to, it});
            const ParticleMessage* reverse = previous[d ^ 1U] ? &*previous[d ^ 1U] : nullptr;
            current[d] = draw_message(beliefs[edge.from], edge.to, edge.distance, model, reverse, radius, rng,
                                      params.reverse_density_floor);
        });

        std::vector<ParticleBelief> next = beliefs;
        std::vector<char> fell_back(n, 0);
        std::vector<char> updated(n, 0);
        parallel_for(n, params.workers, [&](std::size_t t) {
            if (scenario.nodes[t].is_anchor || incoming[t].empty()) return;
            std::vector<const ParticleMessage*> msgs;
            msgs.reserve(incoming[t].size());
            for (std::size_t d : incoming[t])
                if (current[d]) msgs.push_back(&*current[d]);
            if (msgs.empty()) return;
            Rng rng = make_stream(seed, {tag("belief"), t, it});
            auto upd = update_belief(t, prior, msgs, params, radius, rng);
            next[t] = std::move(upd.belief);
            fell_back[t] = upd.fell_back ? 1 : 0;
            updated[t] = 1;
        });
        beliefs = std::move(next);
        for (NodeId t = 0; t < n; ++t)
            if (updated[t]) informed[t] = fell_back[t] ? 0 : 1;

        for (NodeId t = 0; t < n; ++t) {
            const std::uint64_t degree = incoming[t].size();
            TraceRow row{t, it, degree, degree, degree * params.steps.nbp_message_per_particle * m};
            if (!scenario.nodes[t].is_anchor)
                row.compute_steps += params.steps.nbp_update_per_particle_message * m * degree;
            result.trace.rows.push_back(row);
        }

        double shift = 0.0;
        double err_sum = 0.0;
        std::size_t unknowns = 0;
        for (const auto& node : scenario.nodes) {
            if (node.is_anchor) continue;
            const NodeId t = node.id;
            result.estimates[t] = informed[t] ? estimate_position(beliefs[t], params.estimator) : center;
            shift = std::max(shift, distance(result.estimates[t], prev_estimates[t]));
            err_sum += distance(result.estimates[t], node.true_pos);
            ++unknowns;
        }
        result.error_history.push_back(unknowns ? err_sum / static_cast<double>(unknowns) : 0.0);
        result.iterations_run = it;
        if (observer) observer(it, beliefs);
        prev_estimates = result.estimates;
        previous.swap(current);
        if (it > 1 && shift < params.convergence_shift) break;
    }

    // Unknowns never reached by anchor information keep the prior and the
    // field-centre estimate.
    for (const auto& node : scenario.nodes) {
        if (node.is_anchor) continue;
        if (!informed[node.id]) result.flagged[node.id] = true;
        result.per_node_error[node.id] = distance(result.estimates[node.id], node.true_pos);
    }
    return result;
}

double mean_error(const LocalizationResult& result) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < result.per_node_error.size(); ++t) {
        if (result.is_anchor[t]) continue;
        sum += result.per_node_error[t];
        ++count;
    }
    if (count == 0) throw ArgumentError("mean error is undefined without non-anchor nodes");
    return sum / static_cast<double>(count);
}

}  // namespace wsnloc
