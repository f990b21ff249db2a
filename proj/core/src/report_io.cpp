#include "wsnloc/report_io.hpp"

#include <algorithm>
#include <ostream>

#include "wsnloc/text.hpp"

namespace wsnloc {

void write_node_csv(std::ostream& os, const FieldScenario& scenario, const LocalizationResult& result) {
    os << "node_id,true_x,true_y,est_x,est_y,error_m\n";
    for (const auto& node : scenario.nodes) {
        const Vec2 est = result.estimates.at(node.id);
        os << node.id << ',' << format_fixed6(node.true_pos.x) << ',' << format_fixed6(node.true_pos.y) << ','
           << format_fixed6(est.x) << ',' << format_fixed6(est.y) << ','
           << format_fixed6(result.per_node_error.at(node.id)) << '\n';
    }
}

void write_trace_csv(std::ostream& os, const MessageTrace& trace) {
    os << "node_id,iteration,msgs_sent,msgs_received,compute_steps\n";
    for (const auto& r : trace.rows)
        os << r.node << ',' << r.iteration << ',' << r.msgs_sent << ',' << r.msgs_received << ','
           << r.compute_steps << '\n';
}

void write_pareto_csv(std::ostream& os, std::span<const ArchiveMember> front) {
    std::size_t width = 0;
    for (const auto& m : front) width = std::max(width, m.chromosome.genes.size());
    os << "anchor_count,error_m";
    for (std::size_t i = 0; i < width; ++i) os << ",g" << i;
    os << '\n';
    for (const auto& m : front) {
        os << m.objectives.anchor_count << ',' << format_fixed6(m.objectives.error_m);
        for (double g : m.chromosome.genes) os << ',' << format_fixed6(g);
        os << '\n';
    }
}

void write_generation_csv(std::ostream& os, std::span<const GenerationStats> log) {
    os << "generation,front1_size,min_error,median_error\n";
    for (const auto& g : log)
        os << g.generation << ',' << g.front1_size << ',' << format_fixed6(g.min_error) << ','
           << format_fixed6(g.median_error) << '\n';
}

void write_energy_header(std::ostream& os) {
    os << "method,placement,node_id,sent,received,steps,consumed_j,remaining_j\n";
}

void write_energy_rows(std::ostream& os, const std::string& method, const std::string& placement,
                       const EnergyLedger& ledger) {
    for (std::size_t i = 0; i < ledger.per_node.size(); ++i) {
        const auto& n = ledger.per_node[i];
        os << method << ',' << placement << ',' << i << ',' << n.sent << ',' << n.received << ',' << n.steps << ','
           << format_fixed6(n.consumed_j) << ',' << format_fixed6(n.remaining_j) << '\n';
    }
}

void write_energy_summary_csv(std::ostream& os, std::span<const EnergySummaryRow> rows) {
    os << "method,placement,mean_remaining_j\n";
    for (const auto& r : rows) os << r.method << ',' << r.placement << ',' << format_fixed6(r.mean_remaining_j) << '\n';
}

void write_message_counts_csv(std::ostream& os, std::span<const EnergySummaryRow> rows) {
    os << "method,placement,total_sent,total_received,total_steps\n";
    for (const auto& r : rows)
        os << r.method << ',' << r.placement << ',' << r.total_sent << ',' << r.total_received << ','
           << r.total_steps << '\n';
}

}  // namespace wsnloc
