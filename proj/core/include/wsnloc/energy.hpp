#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/trace.hpp"

namespace wsnloc {

struct EnergyConfig {
    double initial_j = 100.0;
    double send_j = 0.003;
    double receive_j = 0.001;
    double step_j = 0.0001;
    StepTable step_table;

    void validate() const;
};

struct NodeEnergy {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t steps = 0;
    double consumed_j = 0.0;
    double remaining_j = 0.0;
    bool depleted = false;  // remaining_j < 0

    friend bool operator==(const NodeEnergy&, const NodeEnergy&) = default;
};

struct EnergyLedger {
    double initial_j = 0.0;
    std::vector<NodeEnergy> per_node;  // indexed by node id

    double mean_remaining() const;
    double total_consumed() const;
    std::uint64_t total_sent() const;
    std::uint64_t total_received() const;
};

/// Folds counts per node, then prices them, so results do not depend on row order.
EnergyLedger account_trace(const MessageTrace& trace, const EnergyConfig& config = {});

struct EnergySummaryRow {
    std::string method;
    std::string placement;
    double mean_remaining_j = 0.0;
    double mean_remaining_anchor_j = 0.0;
    double mean_remaining_unknown_j = 0.0;
    std::uint64_t total_sent = 0;
    std::uint64_t total_received = 0;
    std::uint64_t total_steps = 0;
};

struct LabelledLedger {
    std::string method;
    std::string placement;
    const EnergyLedger* ledger = nullptr;
    std::vector<bool> is_anchor;  // optional; empty treats every node as unknown
};

/// One row per (method, placement), averaging over every ledger with that label.
std::vector<EnergySummaryRow> energy_report(std::span<const LabelledLedger> ledgers);

}  // namespace wsnloc
