#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wsnloc/field.hpp"
#include "wsnloc/nbp.hpp"
#include "wsnloc/trace.hpp"

namespace wsnloc {

/// Minimal hop counts from every node to every anchor plus the DV-Hop
/// per-anchor average hop length.
struct HopTable {
    std::vector<NodeId> anchors;                           // column order
    std::vector<std::vector<std::optional<std::size_t>>> hops;  // [node][anchor column]
    std::vector<std::optional<double>> avg_hop_dist;       // per anchor column
    std::vector<bool> unreachable;                         // node reaches no anchor
    MessageTrace trace;

    std::optional<std::size_t> hop(NodeId node, NodeId anchor) const;
};

/// Breadth-first flood from each anchor. Every node rebroadcasts each
/// anchor's packet once; every neighbour of a rebroadcasting node receives it.
HopTable hop_flood(const FieldScenario& scenario, const RangeGraph& ranges,
                   const StepTable& steps = {});

/// Linearized least squares: subtract the last range equation from the
/// others and solve the 2x2 normal equations. Throws RankError for fewer
/// than three or collinear anchors.
Vec2 multilaterate(std::span<const Vec2> anchor_positions, std::span<const double> distances);

/// DV-Hop localization. Nodes that cannot multilaterate are placed at the
/// field centre and flagged.
LocalizationResult dvhop_localize(const FieldScenario& scenario, const RangeGraph& ranges,
                                  const StepTable& steps = {});

}  // namespace wsnloc
