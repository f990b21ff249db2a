#include "wsnloc/energy.hpp"

#include <cmath>
#include <map>

#include "wsnloc/errors.hpp"

namespace wsnloc {

void EnergyConfig::validate() const {
    if (!(initial_j > 0.0)) throw ArgumentError("initial_j must be positive");
    if (!(send_j >= 0.0 && receive_j >= 0.0 && step_j >= 0.0)) throw ArgumentError("energy costs must be non-negative");
}

double EnergyLedger::mean_remaining() const {
    if (per_node.empty()) return initial_j;
    double s = 0.0;
    for (const auto& n : per_node) s += n.remaining_j;
    return s / static_cast<double>(per_node.size());
}

double EnergyLedger::total_consumed() const {
    double s = 0.0;
    for (const auto& n : per_node) s += n.consumed_j;
    return s;
}

std::uint64_t EnergyLedger::total_sent() const {
    std::uint64_t s = 0;
    for (const auto& n : per_node) s += n.sent;
    return s;
}

std::uint64_t EnergyLedger::total_received() const {
    std::uint64_t s = 0;
    for (const auto& n : per_node) s += n.received;
    return s;
}

EnergyLedger account_trace(const MessageTrace& trace, const EnergyConfig& config) {
    config.validate();
    EnergyLedger ledger;
    ledger.initial_j = config.initial_j;
    ledger.per_node.resize(trace.node_count);
    for (const auto& row : trace.rows) {
        if (row.node >= trace.node_count)
            throw LookupError("trace row names node " + std::to_string(row.node) + " outside the network");
        auto& n = ledger.per_node[row.node];
        n.sent += row.msgs_sent;
        n.received += row.msgs_received;
        n.steps += row.compute_steps;
    }
    for (auto& n : ledger.per_node) {
        n.consumed_j = static_cast<double>(n.sent) * config.send_j +
                       static_cast<double>(n.received) * config.receive_j +
                       static_cast<double>(n.steps) * config.step_j;
        n.remaining_j = config.initial_j - n.consumed_j;
        n.depleted = n.remaining_j < 0.0;
    }
    return ledger;
}

std::vector<EnergySummaryRow> energy_report(std::span<const LabelledLedger> ledgers) {
    if (ledgers.empty()) throw ArgumentError("energy_report needs at least one ledger");
    struct Acc {
        double all = 0.0, anchor = 0.0, unknown = 0.0;
        std::size_t n_all = 0, n_anchor = 0, n_unknown = 0;
        std::uint64_t sent = 0, received = 0, steps = 0;
    };
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const auto& l : ledgers) {
        if (!l.ledger) throw ArgumentError("null ledger");
        const auto key = std::pair{l.method, l.placement};
        if (!acc.count(key)) order.push_back(key);
        Acc& a = acc[key];
        for (std::size_t i = 0; i < l.ledger->per_node.size(); ++i) {
            const auto& n = l.ledger->per_node[i];
            a.all += n.remaining_j;
            ++a.n_all;
            const bool anchor = i < l.is_anchor.size() && l.is_anchor[i];
            (anchor ? a.anchor : a.unknown) += n.remaining_j;
            ++(anchor ? a.n_anchor : a.n_unknown);
            a.sent += n.sent;
            a.received += n.received;
            a.steps += n.steps;
        }
    }
    auto mean = [](double s, std::size_t n) { return n ? s / static_cast<double>(n) : 0.0; };
    std::vector<EnergySummaryRow> rows;
    for (const auto& key : order) {
        const Acc& a = acc[key];
        rows.push_back({key.first, key.second, mean(a.all, a.n_all), mean(a.anchor, a.n_anchor),
                        mean(a.unknown, a.n_unknown), a.sent, a.received, a.steps});
    }
    return rows;
}

}  // namespace wsnloc
