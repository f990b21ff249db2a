#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wsnloc/field.hpp"

namespace wsnloc {

/// Compute-step cost model shared by the localizers and the energy ledger.
/// A "step" is one unit of the per-step energy cost.
struct StepTable {
    std::uint64_t nbp_message_per_particle = 2;         // sampling + weighting
    std::uint64_t nbp_update_per_particle_message = 1;  // M x incoming messages
    std::uint64_t dvhop_flood_packet = 1;
    std::uint64_t dvhop_multilaterate = 50;
};

struct TraceRow {
    NodeId node = 0;
    std::size_t iteration = 0;
    std::uint64_t msgs_sent = 0;
    std::uint64_t msgs_received = 0;
    std::uint64_t compute_steps = 0;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Per node, per iteration radio and compute event counts. One logical
/// message per (sender, receiver, iteration).
struct MessageTrace {
    std::size_t node_count = 0;
    std::vector<TraceRow> rows;

    /// Appends `other`'s rows; iterations are kept as recorded.
    void append(const MessageTrace& other);

    std::uint64_t total_sent() const;
    std::uint64_t total_received() const;
    std::uint64_t total_steps() const;

    friend bool operator==(const MessageTrace&, const MessageTrace&) = default;
};

}  // namespace wsnloc
