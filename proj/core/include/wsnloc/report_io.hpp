#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "wsnloc/energy.hpp"
#include "wsnloc/field.hpp"
#include "wsnloc/moea.hpp"
#include "wsnloc/nbp.hpp"

namespace wsnloc {

// CSV writers. Every real is written with six decimals.

/// node_id,true_x,true_y,est_x,est_y,error_m
void write_node_csv(std::ostream& os, const FieldScenario& scenario, const LocalizationResult& result);

/// node_id,iteration,msgs_sent,msgs_received,compute_steps
void write_trace_csv(std::ostream& os, const MessageTrace& trace);

/// anchor_count,error_m,genes...
void write_pareto_csv(std::ostream& os, std::span<const ArchiveMember> front);

/// generation,front1_size,min_error,median_error
void write_generation_csv(std::ostream& os, std::span<const GenerationStats> log);

/// method,placement,node_id,sent,received,steps,consumed_j,remaining_j
void write_energy_header(std::ostream& os);
void write_energy_rows(std::ostream& os, const std::string& method, const std::string& placement,
                       const EnergyLedger& ledger);

/// method,placement,mean_remaining_j
void write_energy_summary_csv(std::ostream& os, std::span<const EnergySummaryRow> rows);

/// method,placement,total_sent,total_received,total_steps
void write_message_counts_csv(std::ostream& os, std::span<const EnergySummaryRow> rows);

}  // namespace wsnloc
