#include "wsnloc/field.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "wsnloc/errors.hpp"
#include "wsnloc/random.hpp"

namespace wsnloc {

namespace {

std::string point_str(Vec2 p) {
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

void check_dimensions(double width, double height, double radius) {
    if (!(width > 0.0) || !(height > 0.0)) throw ArgumentError("field dimensions must be positive");
    if (!(radius > 0.0)) throw ArgumentError("communication radius must be positive");
}

}  // namespace

std::size_t FieldScenario::anchor_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const NodeRecord& n) { return n.is_anchor; }));
}

std::vector<NodeId> FieldScenario::anchor_ids() const {
    std::vector<NodeId> ids;
    for (const auto& n : nodes)
        if (n.is_anchor) ids.push_back(n.id);
    return ids;
}

std::vector<NodeId> FieldScenario::unknown_ids() const {
    std::vector<NodeId> ids;
    for (const auto& n : nodes)
        if (!n.is_anchor) ids.push_back(n.id);
    return ids;
}

std::vector<Vec2> FieldScenario::anchor_positions() const {
    std::vector<Vec2> out;
    for (const auto& n : nodes)
        if (n.is_anchor) out.push_back(n.true_pos);
    return out;
}

const NodeRecord& FieldScenario::node(NodeId id) const {
    if (id >= nodes.size()) throw LookupError("unknown node id " + std::to_string(id));
    return nodes[id];
}

void FieldScenario::validate() const {
    check_dimensions(width, height, radius);
    const Box box = bounds();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id != i)
            throw ArgumentError("node ids must be dense and ordered; found id " +
                                std::to_string(nodes[i].id) + " at index " + std::to_string(i));
        if (!box.contains(nodes[i].true_pos))
            throw BoundsError("node " + std::to_string(i) + " at " + point_str(nodes[i].true_pos) +
                              " lies outside the field");
    }
}

void MeasurementModel::validate() const {
    if (!(noise_sigma >= 0.0)) throw ArgumentError("noise_sigma must be >= 0");
    if (!(min_distance_floor > 0.0)) throw ArgumentError("min_distance_floor must be > 0");
}

RangeGraph::RangeGraph(std::size_t node_count, std::vector<RangeEdge> edges)
    : edges_(std::move(edges)), adjacency_(node_count) {
    for (auto& e : edges_) {
        if (e.t > e.u) std::swap(e.t, e.u);
        if (e.u >= node_count || e.t == e.u) throw ArgumentError("invalid range edge");
    }
    std::sort(edges_.begin(), edges_.end(), [](const RangeEdge& a, const RangeEdge& b) {
        return a.t != b.t ? a.t < b.t : a.u < b.u;
    });
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (edges_[i].t == edges_[i - 1].t && edges_[i].u == edges_[i - 1].u)
            throw ArgumentError("duplicate range edge");
    for (const auto& e : edges_) {
        adjacency_[e.t].push_back({e.u, e.distance});
        adjacency_[e.u].push_back({e.t, e.distance});
    }
    for (auto& adj : adjacency_)
        std::sort(adj.begin(), adj.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
}

std::span<const RangeGraph::Neighbor> RangeGraph::neighbors(NodeId t) const {
    if (t >= adjacency_.size()) throw LookupError("unknown node id " + std::to_string(t));
    return adjacency_[t];
}

bool RangeGraph::connected(NodeId t, NodeId u) const {
    const auto adj = neighbors(t);
    return std::binary_search(adj.begin(), adj.end(), Neighbor{u, 0.0},
                              [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
}

double RangeGraph::distance(NodeId t, NodeId u) const {
    const auto adj = neighbors(t);
    auto it = std::lower_bound(adj.begin(), adj.end(), u,
                               [](const Neighbor& a, NodeId id) { return a.id < id; });
    if (it == adj.end() || it->id != u)
        throw LookupError("no range edge between " + std::to_string(t) + " and " + std::to_string(u));
    return it->distance;
}

FieldScenario build_scenario(double width, double height, double radius, std::size_t n_unknown,
                             std::span<const Vec2> anchor_positions, std::uint64_t seed) {
    check_dimensions(width, height, radius);
    const Box box = field_box(width, height);
    for (const auto& a : anchor_positions)
        if (!box.contains(a)) throw BoundsError("anchor " + point_str(a) + " lies outside the field");

    FieldScenario s{width, height, radius, {}, seed};
    s.nodes.reserve(n_unknown + anchor_positions.size());
    Rng rng = make_stream(seed, {tag("unknowns")});
    std::uniform_real_distribution<double> ux(0.0, width);
    std::uniform_real_distribution<double> uy(0.0, height);
    for (std::size_t i = 0; i < n_unknown; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        s.nodes.push_back({i, {x, y}, false});
    }
    for (const auto& a : anchor_positions) s.nodes.push_back({s.nodes.size(), a, true});
    return s;
}

std::vector<Vec2> place_anchors_preset(Placement mode, std::size_t k, const Box& field,
                                       std::uint64_t seed) {
    if (k == 0) throw ArgumentError("anchor count k must be >= 1");
    const double w = field.xmax - field.xmin;
    const double h = field.ymax - field.ymin;
    std::vector<Vec2> out;
    out.reserve(k);
    if (mode == Placement::random) {
        Rng rng = make_stream(seed, {tag("anchors.random")});
        std::uniform_real_distribution<double> ux(field.xmin, field.xmax);
        std::uniform_real_distribution<double> uy(field.ymin, field.ymax);
        for (std::size_t i = 0; i < k; ++i) {
            const double x = ux(rng);
            const double y = uy(rng);
            out.push_back({x, y});
        }
        return out;
    }
    const double perimeter = 2.0 * (w + h);
    for (std::size_t i = 0; i < k; ++i) {
        double s = perimeter * static_cast<double>(i) / static_cast<double>(k);
        Vec2 p;
        if (s < w) {
            p = {s, 0.0};
        } else if ((s -= w) < h) {
            p = {w, s};
        } else if ((s -= h) < w) {
            p = {w - s, h};
        } else {
            s -= w;
            p = {0.0, h - s};
        }
        out.push_back(field.clamp({field.xmin + p.x, field.ymin + p.y}));
    }
    return out;
}

std::vector<NodeId> neighbors(const FieldScenario& scenario, NodeId t) {
    const Vec2 pt = scenario.node(t).true_pos;
    std::vector<NodeId> out;
    for (const auto& n : scenario.nodes)
        if (n.id != t && distance(pt, n.true_pos) <= scenario.radius) out.push_back(n.id);
    return out;
}

RangeGraph measure_ranges(const FieldScenario& scenario, const MeasurementModel& model,
                          std::uint64_t seed) {
    scenario.validate();
    model.validate();
    std::vector<RangeEdge> edges;
    const auto& nodes = scenario.nodes;
    for (std::size_t t = 0; t < nodes.size(); ++t) {
        for (std::size_t u = t + 1; u < nodes.size(); ++u) {
            const double true_d = distance(nodes[t].true_pos, nodes[u].true_pos);
            if (true_d > scenario.radius) continue;
            double d = true_d;
            if (model.noise_sigma > 0.0) {
                Rng rng = make_stream(seed, {tag("range"), t, u});
                std::normal_distribution<double> noise(0.0, model.noise_sigma);
                const double d_tu = true_d + noise(rng);
                const double d_ut = true_d + noise(rng);
                d = 0.5 * (d_tu + d_ut);
            }
            edges.push_back({t, u, std::max(d, model.min_distance_floor)});
        }
    }
    return RangeGraph(nodes.size(), std::move(edges));
}

double connectivity_prob(Vec2 p, Vec2 q, double radius) {
    if (!(radius > 0.0)) throw ArgumentError("communication radius must be positive");
    return std::exp(-squared_norm(p - q) / (2.0 * radius * radius));
}

FieldScenario with_anchors(const FieldScenario& base, std::span<const Vec2> anchors) {
    FieldScenario s = base;
    std::erase_if(s.nodes, [](const NodeRecord& n) { return n.is_anchor; });
    for (std::size_t i = 0; i < s.nodes.size(); ++i) s.nodes[i].id = i;
    const Box box = s.bounds();
    for (const auto& a : anchors) {
        if (!box.contains(a)) throw BoundsError("anchor " + point_str(a) + " lies outside the field");
        s.nodes.push_back({s.nodes.size(), a, true});
    }
    return s;
}

std::vector<bool> anchored_nodes(const FieldScenario& scenario, const RangeGraph& ranges) {
    std::vector<bool> seen(scenario.size(), false);
    std::deque<NodeId> queue;
    for (NodeId a : scenario.anchor_ids()) {
        seen[a] = true;
        queue.push_back(a);
    }
    while (!queue.empty()) {
        const NodeId t = queue.front();
        queue.pop_front();
        for (const auto& nb : ranges.neighbors(t)) {
            if (!seen[nb.id]) {
                seen[nb.id] = true;
                queue.push_back(nb.id);
            }
        }
    }
    return seen;
}

}  // namespace wsnloc
