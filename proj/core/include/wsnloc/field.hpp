#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wsnloc/geometry.hpp"

namespace wsnloc {

using NodeId = std::size_t;

struct NodeRecord {
    NodeId id = 0;
    Vec2 true_pos;
    bool is_anchor = false;

    friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

/// A deployed network: field geometry, nodes and the radio range R.
/// Unknown nodes come first (ids 0..n_unknown-1), anchors follow, so the
/// same seed yields the same unknowns regardless of the anchor layout.
struct FieldScenario {
    double width = 0.0;
    double height = 0.0;
    double radius = 0.0;
    std::vector<NodeRecord> nodes;
    std::uint64_t rng_seed = 0;

    Box bounds() const { return field_box(width, height); }
    std::size_t size() const { return nodes.size(); }
    std::size_t anchor_count() const;
    std::vector<NodeId> anchor_ids() const;
    std::vector<NodeId> unknown_ids() const;
    std::vector<Vec2> anchor_positions() const;
    const NodeRecord& node(NodeId id) const;

    /// Throws ArgumentError / BoundsError when an invariant is broken.
    void validate() const;

    friend bool operator==(const FieldScenario&, const FieldScenario&) = default;
};

struct MeasurementModel {
    double noise_sigma = 1.0;
    double min_distance_floor = 0.1;

    void validate() const;
};

struct RangeEdge {
    NodeId t = 0;  // t < u
    NodeId u = 0;
    double distance = 0.0;

    friend bool operator==(const RangeEdge&, const RangeEdge&) = default;
};

/// Symmetrized range measurements on the hard-disk connectivity graph.
/// One entry per unordered pair, stored with t < u in lexicographic order.
class RangeGraph {
public:
    struct Neighbor {
        NodeId id;
        double distance;
    };

    RangeGraph() = default;
    RangeGraph(std::size_t node_count, std::vector<RangeEdge> edges);

    std::size_t node_count() const { return adjacency_.size(); }
    std::span<const RangeEdge> edges() const { return edges_; }
    std::span<const Neighbor> neighbors(NodeId t) const;
    bool connected(NodeId t, NodeId u) const;
    /// Throws LookupError when {t,u} is not an edge.
    double distance(NodeId t, NodeId u) const;

private:
    std::vector<RangeEdge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

FieldScenario build_scenario(double width, double height, double radius, std::size_t n_unknown,
                             std::span<const Vec2> anchor_positions, std::uint64_t seed);

enum class Placement { edge, random };

/// Edge mode walks the perimeter counter-clockwise from (0,0) in equal
/// arc-length steps; random mode draws uniform points.
std::vector<Vec2> place_anchors_preset(Placement mode, std::size_t k, const Box& field,
                                       std::uint64_t seed);

/// Nodes within distance R of t (boundary inclusive), ascending ids.
std::vector<NodeId> neighbors(const FieldScenario& scenario, NodeId t);

RangeGraph measure_ranges(const FieldScenario& scenario, const MeasurementModel& model,
                          std::uint64_t seed);

/// exp(-|p-q|^2 / (2 R^2))
double connectivity_prob(Vec2 p, Vec2 q, double radius);

/// Copy of `base` (unknown nodes only) with anchors appended after the unknowns.
FieldScenario with_anchors(const FieldScenario& base, std::span<const Vec2> anchors);

/// Ids reachable from any anchor over the range graph.
std::vector<bool> anchored_nodes(const FieldScenario& scenario, const RangeGraph& ranges);

}  // namespace wsnloc
