#include "netrepair/polling.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "netrepair/csv.hpp"

namespace netrepair {

std::string PollingTour::label() const {
    std::string out = "{";
    for (std::size_t k = 0; k < sequence.size(); ++k) {
        out += (k ? "," : "") + std::to_string(sequence[k] + 1);
    }
    return out + "}";
}

int cycle_length(const NetworkLayout& layout, std::span<const int> sequence) {
    int total = 0;
    for (std::size_t k = 0; k < sequence.size(); ++k) {
        total += layout.distance(sequence[k], sequence[(k + 1) % sequence.size()]);
    }
    return total;
}

PollingTour best_tour(const NetworkLayout& layout, std::vector<int> subset) {
    if (subset.empty()) {
        throw std::invalid_argument("best_tour: subset must be non-empty");
    }
    if (subset.size() > 8) {
        throw std::invalid_argument("best_tour: at most 8 machines for exhaustive search");
    }
    std::sort(subset.begin(), subset.end());
    if (std::adjacent_find(subset.begin(), subset.end()) != subset.end()) {
        throw std::invalid_argument("best_tour: machines must be distinct");
    }
    for (int j : subset) {
        if (!layout.is_machine(j)) {
            throw std::invalid_argument("best_tour: node " + std::to_string(j + 1) +
                                        " is not a machine");
        }
    }
    PollingTour best{subset, cycle_length(layout, subset)};
    // permutations of the tail visit sequences in lexicographic order, so the
    // first strict improvement is also the lexicographically smallest
    while (std::next_permutation(subset.begin() + 1, subset.end())) {
        const int length = cycle_length(layout, subset);
        if (length < best.cycle_length) {
            best = PollingTour{subset, length};
        }
    }
    return best;
}

Action polling_decision(const NetworkLayout& layout, const PollingTour& tour, const SystemState& x,
                        std::size_t& progress) {
    const NodeId here = x.location;
    NodeId target = tour.sequence[progress];
    if (here == target) {
        if (x.conditions[target] > 0) {
            return here;
        }
        progress = (progress + 1) % tour.sequence.size();
        target = tour.sequence[progress];
        if (target == here) {
            return here;
        }
    }
    return layout.next_hop(here, target);
}

PollingPolicy::PollingPolicy(const InstanceParameters& inst, PollingTour tour)
    : inst_(&inst), tour_(std::move(tour)) {
    if (tour_.sequence.empty()) {
        throw std::invalid_argument("polling policy: empty tour");
    }
}

Action PollingPolicy::decide(const SystemState& x) {
    return polling_decision(inst_->layout, tour_, x, progress_);
}

std::string PollingResult::csv() const {
    std::ostringstream out;
    out << "subset,cycle_length,average_cost,average_reward,best\n";
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        const auto& row = subsets[k];
        out << '"' << row.tour.label() << '"' << ',' << row.tour.cycle_length << ','
            << format_number(row.report.average_cost) << ','
            << format_number(row.report.average_reward) << ',' << (k == best ? 1 : 0) << '\n';
    }
    return out.str();
}

PollingResult best_polling_report(const InstanceParameters& inst, const SystemState& x0,
                                  std::uint64_t steps, std::span<const double> crn,
                                  int machine_limit) {
    const int m = inst.machine_count();
    if (m > machine_limit) {
        throw std::invalid_argument("polling: " + std::to_string(m) + " machines exceeds the limit of " +
                                    std::to_string(machine_limit));
    }
    if (m > 20) {
        throw std::invalid_argument("polling: too many machines to enumerate subsets");
    }
    PollingResult result;
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        std::vector<int> subset;
        for (int j = 0; j < m; ++j) {
            if (mask & (1u << j)) subset.push_back(j);
        }
        PollingPolicy policy(inst, best_tour(inst.layout, subset));
        auto report = simulate(inst, policy, x0, steps, crn);
        result.subsets.push_back({policy.tour(), std::move(report)});
        if (result.subsets.back().report.average_cost <
            result.subsets[result.best].report.average_cost) {
            result.best = result.subsets.size() - 1;
        }
    }
    return result;
}

}  // namespace netrepair
