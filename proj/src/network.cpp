#include "netrepair/network.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace netrepair {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

std::vector<int> bfs(const std::vector<std::vector<NodeId>>& adj, NodeId source) {
    std::vector<int> d(adj.size(), kUnreached);
    std::deque<NodeId> queue{source};
    d[source] = 0;
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        for (NodeId w : adj[u]) {
            if (d[w] == kUnreached) {
                d[w] = d[u] + 1;
                queue.push_back(w);
            }
        }
    }
    return d;
}

}  // namespace

NetworkLayout::NetworkLayout(int machine_count, std::vector<std::vector<NodeId>> adjacency,
                             std::optional<int> grid_side, std::vector<LatticePoint> coordinates)
    : machine_count_(machine_count),
      adjacency_(std::move(adjacency)),
      grid_side_(grid_side),
      coords_(std::move(coordinates)) {
    const auto n = static_cast<NodeId>(adjacency_.size());
    if (n == 0 || machine_count_ < 1 || machine_count_ > n) {
        throw std::invalid_argument("network: need 1 <= machines <= nodes");
    }
    if (!coords_.empty() && static_cast<NodeId>(coords_.size()) != n) {
        throw std::invalid_argument("network: coordinates must cover every node");
    }
    for (NodeId u = 0; u < n; ++u) {
        auto& row = adjacency_[u];
        std::sort(row.begin(), row.end());
        if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
            throw std::invalid_argument("network: duplicate edge at node " + std::to_string(u + 1));
        }
        for (NodeId w : row) {
            if (w < 0 || w >= n || w == u) {
                throw std::invalid_argument("network: bad neighbour of node " + std::to_string(u + 1));
            }
        }
    }
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId w : adjacency_[u]) {
            if (!std::binary_search(adjacency_[w].begin(), adjacency_[w].end(), u)) {
                throw std::invalid_argument("network: adjacency is not symmetric");
            }
        }
    }

    const auto un = static_cast<std::size_t>(n);
    dist_.assign(un * un, 0);
    for (NodeId s = 0; s < n; ++s) {
        const auto d = bfs(adjacency_, s);
        for (NodeId t = 0; t < n; ++t) {
            if (d[t] == kUnreached) {
                throw std::invalid_argument("network: graph is not connected");
            }
            dist_[s * un + t] = d[t];
            diameter_ = std::max(diameter_, d[t]);
        }
    }

    next_.assign(un * un, -1);
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId t = 0; t < n; ++t) {
            if (s == t) {
                continue;
            }
            // adjacency rows are sorted, so the first hit is the smallest id
            for (NodeId w : adjacency_[s]) {
                if (distance(w, t) == distance(s, t) - 1) {
                    next_[s * un + t] = w;
                    break;
                }
            }
        }
    }
}

bool NetworkLayout::adjacent(NodeId u, NodeId v) const {
    const auto& row = adjacency_.at(u);
    return std::binary_search(row.begin(), row.end(), v);
}

std::size_t NetworkLayout::edge_count() const {
    std::size_t total = 0;
    for (const auto& row : adjacency_) {
        total += row.size();
    }
    return total / 2;
}

NodeId NetworkLayout::next_hop(NodeId from, NodeId to) const {
    if (from == to) {
        throw std::invalid_argument("next_hop: source equals destination");
    }
    return next_[static_cast<std::size_t>(from) * adjacency_.size() + to];
}

NetworkLayout build_lattice_layout(int grid_side, std::span<const LatticePoint> machine_coords) {
    if (grid_side < 1) {
        throw std::invalid_argument("lattice: grid side must be >= 1");
    }
    if (machine_coords.empty()) {
        throw std::invalid_argument("lattice: at least one machine required");
    }
    std::set<LatticePoint> machines;
    for (const auto& p : machine_coords) {
        if (p.a < 1 || p.a > grid_side || p.b < 1 || p.b > grid_side) {
            throw std::invalid_argument("lattice: coordinate (" + std::to_string(p.a) + "," +
                                        std::to_string(p.b) + ") outside 1.." +
                                        std::to_string(grid_side));
        }
        if (!machines.insert(p).second) {
            throw std::invalid_argument("lattice: duplicate coordinate (" + std::to_string(p.a) +
                                        "," + std::to_string(p.b) + ")");
        }
    }

    // std::set iterates in (a, b) order, which is the machine numbering
    std::vector<LatticePoint> coords(machines.begin(), machines.end());
    for (int a = 1; a <= grid_side; ++a) {
        for (int b = 1; b <= grid_side; ++b) {
            if (!machines.contains({a, b})) {
                coords.push_back({a, b});
            }
        }
    }
    std::map<LatticePoint, NodeId> id_of;
    for (std::size_t k = 0; k < coords.size(); ++k) {
        id_of[coords[k]] = static_cast<NodeId>(k);
    }
    std::vector<std::vector<NodeId>> adj(coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const auto [a, b] = coords[k];
        const LatticePoint around[] = {{a - 1, b}, {a + 1, b}, {a, b - 1}, {a, b + 1}};
        for (const auto& q : around) {
            if (auto it = id_of.find(q); it != id_of.end()) {
                adj[k].push_back(it->second);
            }
        }
    }
    return NetworkLayout(static_cast<int>(machines.size()), std::move(adj), grid_side,
                         std::move(coords));
}

NetworkLayout build_star_layout(int machines, int radius) {
    if (machines < 2 || radius < 1) {
        throw std::invalid_argument("star: need m >= 2 and radius >= 1");
    }
    const NodeId center = machines;
    const int inner = radius - 1;
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(machines + 1 + machines * inner));
    auto link = [&adj](NodeId u, NodeId v) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    };
    for (NodeId j = 0; j < machines; ++j) {
        NodeId previous = center;
        for (int t = 1; t <= inner; ++t) {
            const NodeId node = machines + 1 + j * inner + (t - 1);
            link(previous, node);
            previous = node;
        }
        link(previous, j);
    }
    return NetworkLayout(machines, std::move(adj));
}

NetworkLayout build_complete_layout(int machines) {
    if (machines < 2) {
        throw std::invalid_argument("complete: need m >= 2");
    }
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(machines));
    for (NodeId u = 0; u < machines; ++u) {
        for (NodeId v = 0; v < machines; ++v) {
            if (u != v) {
                adj[u].push_back(v);
            }
        }
    }
    return NetworkLayout(machines, std::move(adj));
}

}  // namespace netrepair
