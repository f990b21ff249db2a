#include "wsnloc/trace.hpp"

#include <algorithm>
#include <numeric>

namespace wsnloc {

void MessageTrace::append(const MessageTrace& other) {
    node_count = std::max(node_count, other.node_count);
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::uint64_t MessageTrace::total_sent() const {
    return std::accumulate(rows.begin(), rows.end(), std::uint64_t{0},
                           [](std::uint64_t s, const TraceRow& r) { return s + r.msgs_sent; });
}

std::uint64_t MessageTrace::total_received() const {
    return std::accumulate(rows.begin(), rows.end(), std::uint64_t{0},
                           [](std::uint64_t s, const TraceRow& r) { return s + r.msgs_received; });
}

std::uint64_t MessageTrace::total_steps() const {
    return std::accumulate(rows.begin(), rows.end(), std::uint64_t{0},
                           [](std::uint64_t s, const TraceRow& r) { return s + r.compute_steps; });
}

}  // namespace wsnloc
