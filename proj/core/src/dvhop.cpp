#include "wsnloc/dvhop.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "wsnloc/errors.hpp"

namespace wsnloc {

std::optional<std::size_t> HopTable::hop(NodeId node, NodeId anchor) const {
    for (std::size_t c = 0; c < anchors.size(); ++c)
        if (anchors[c] == anchor) return hops.at(node)[c];
    throw LookupError("node " + std::to_string(anchor) + " is not an anchor");
}

HopTable hop_flood(const FieldScenario& scenario, const RangeGraph& ranges, const StepTable& steps) {
    scenario.validate();
    const std::size_t n = scenario.size();
    HopTable table;
    table.anchors = scenario.anchor_ids();
    if (table.anchors.size() < 2) throw ConfigurationError("DV-Hop calibration needs at least two anchors");
    const std::size_t a = table.anchors.size();
    table.hops.assign(n, std::vector<std::optional<std::size_t>>(a));
    table.trace.node_count = n;
    std::vector<TraceRow> rows(n);
    for (NodeId t = 0; t < n; ++t) rows[t] = {t, 1, 0, 0, 0};

    for (std::size_t c = 0; c < a; ++c) {
        auto& col = table.hops;
        std::deque<NodeId> queue{table.anchors[c]};
        col[table.anchors[c]][c] = 0;
        while (!queue.empty()) {
            const NodeId t = queue.front();
            queue.pop_front();
            ++rows[t].msgs_sent;
            for (const auto& nb : ranges.neighbors(t)) {
                ++rows[nb.id].msgs_received;
                rows[nb.id].compute_steps += steps.dvhop_flood_packet;
                if (!col[nb.id][c]) {
                    col[nb.id][c] = *col[t][c] + 1;
                    queue.push_back(nb.id);
                }
            }
        }
    }

    table.avg_hop_dist.resize(a);
    for (std::size_t c = 0; c < a; ++c) {
        const Vec2 pc = scenario.nodes[table.anchors[c]].true_pos;
        double dist_sum = 0.0;
        std::size_t hop_sum = 0;
        for (std::size_t o = 0; o < a; ++o) {
            if (o == c) continue;
            if (const auto h = table.hops[table.anchors[o]][c]) {
                dist_sum += distance(pc, scenario.nodes[table.anchors[o]].true_pos);
                hop_sum += *h;
            }
        }
        if (hop_sum > 0) table.avg_hop_dist[c] = dist_sum / static_cast<double>(hop_sum);
    }

    table.unreachable.assign(n, false);
    for (NodeId t = 0; t < n; ++t) {
        bool any = false;
        for (const auto& h : table.hops[t]) any = any || h.has_value();
        table.unreachable[t] = !any;
    }
    table.trace.rows = std::move(rows);
    return table;
}

Vec2 multilaterate(std::span<const Vec2> anchor_positions, std::span<const double> distances) {
    const std::size_t k = anchor_positions.size();
    if (k != distances.size()) throw ArgumentError("one distance per anchor required");
    if (k < 3) throw RankError("multilateration needs at least three anchors");
    const Vec2 last = anchor_positions[k - 1];
    const double dl = distances[k - 1];
    // 2 (p_i - p_l) . x = |p_i|^2 - |p_l|^2 - d_i^2 + d_l^2
    Mat2 ata;
    Vec2 atb;
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const Vec2 row = 2.0 * (anchor_positions[i] - last);
        const double rhs = squared_norm(anchor_positions[i]) - squared_norm(last) -
                           distances[i] * distances[i] + dl * dl;
        ata = ata + Mat2{row.x * row.x, row.x * row.y, row.y * row.y};
        atb = atb + rhs * row;
        scale = std::max(scale, squared_norm(row));
    }
    const double det = ata.det();
    if (!(scale > 0.0) || std::abs(det) <= 1e-10 * ata.trace() * ata.trace())
        throw RankError("anchors are collinear; position is not identifiable");
    return {(ata.yy * atb.x - ata.xy * atb.y) / det, (ata.xx * atb.y - ata.xy * atb.x) / det};
}

LocalizationResult dvhop_localize(const FieldScenario& scenario, const RangeGraph& ranges,
                                  const StepTable& steps) {
    if (scenario.anchor_count() < 3) throw ConfigurationError("DV-Hop needs at least three anchors");
    HopTable table = hop_flood(scenario, ranges, steps);
    const std::size_t n = scenario.size();
    const Box field = scenario.bounds();

    LocalizationResult result;
    result.estimates.resize(n);
    result.per_node_error.assign(n, 0.0);
    result.is_anchor.resize(n);
    result.flagged.assign(n, false);
    result.iterations_run = 1;
    result.trace = std::move(table.trace);

    double err_sum = 0.0;
    std::size_t unknowns = 0;
    for (const auto& node : scenario.nodes) {
        const NodeId t = node.id;
        result.is_anchor[t] = node.is_anchor;
        if (node.is_anchor) {
            result.estimates[t] = node.true_pos;
            continue;
        }
        // Correction factor of the nearest (fewest hops, then lowest id) calibrated anchor.
        std::optional<double> hop_len;
        std::size_t best_hops = std::numeric_limits<std::size_t>::max();
        for (std::size_t c = 0; c < table.anchors.size(); ++c) {
            const auto h = table.hops[t][c];
            if (h && table.avg_hop_dist[c] && *h < best_hops) {
                best_hops = *h;
                hop_len = table.avg_hop_dist[c];
            }
        }
        std::vector<Vec2> anchors;
        std::vector<double> dists;
        if (hop_len) {
            for (std::size_t c = 0; c < table.anchors.size(); ++c) {
                if (const auto h = table.hops[t][c]) {
                    anchors.push_back(scenario.nodes[table.anchors[c]].true_pos);
                    dists.push_back(static_cast<double>(*h) * *hop_len);
                }
            }
        }
        Vec2 estimate = field.center();
        bool flagged = true;
        if (anchors.size() >= 3) {
            try {
                estimate = field.clamp(multilaterate(anchors, dists));
                flagged = false;
                result.trace.rows[t].compute_steps += steps.dvhop_multilaterate;
            } catch (const RankError&) {
            }
        }
        result.estimates[t] = estimate;
        result.flagged[t] = flagged;
        result.per_node_error[t] = distance(estimate, node.true_pos);
        err_sum += result.per_node_error[t];
        ++unknowns;
    }
    result.error_history.push_back(unknowns ? err_sum / static_cast<double>(unknowns) : 0.0);
    return result;
}

}  // namespace wsnloc
