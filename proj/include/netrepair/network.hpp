#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace netrepair {

/// Node index. Machines occupy 0..m-1 and intermediate stages m..n-1; files and
/// printed output use 1-based labels (index + 1).
using NodeId = std::int32_t;

struct LatticePoint {
    int a = 0;  // row
    int b = 0;  // column
    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
    friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

/// Connected undirected graph of machines and stages with all-pairs hop
/// distances and canonical next hops. Immutable after construction.
///
/// Among tied shortest paths the canonical one steps to the smallest-index
/// neighbour, so every routing decision in the library is deterministic.
class NetworkLayout {
public:
    NetworkLayout() = default;
    /// Throws std::invalid_argument for asymmetric/self-looped adjacency, bad
    /// ids, or a disconnected graph.
    NetworkLayout(int machine_count, std::vector<std::vector<NodeId>> adjacency,
                  std::optional<int> grid_side = std::nullopt,
                  std::vector<LatticePoint> coordinates = {});

    int node_count() const { return static_cast<int>(adjacency_.size()); }
    int machine_count() const { return machine_count_; }
    bool is_machine(NodeId v) const { return v >= 0 && v < machine_count_; }

    std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.at(v); }
    const std::vector<std::vector<NodeId>>& adjacency() const { return adjacency_; }
    bool adjacent(NodeId u, NodeId v) const;
    std::size_t edge_count() const;

    int distance(NodeId from, NodeId to) const {
        return dist_[static_cast<std::size_t>(from) * adjacency_.size() + to];
    }
    /// Largest hop distance between any two nodes.
    int diameter() const { return diameter_; }

    /// First node on the canonical shortest path; throws if from == to.
    NodeId next_hop(NodeId from, NodeId to) const;

    std::optional<int> grid_side() const { return grid_side_; }
    /// Per-node lattice coordinates (empty unless built on a lattice).
    const std::vector<LatticePoint>& coordinates() const { return coords_; }

    friend bool operator==(const NetworkLayout& x, const NetworkLayout& y) {
        return x.machine_count_ == y.machine_count_ && x.adjacency_ == y.adjacency_ &&
               x.grid_side_ == y.grid_side_ && x.coords_ == y.coords_;
    }

private:
    int machine_count_ = 0;
    std::vector<std::vector<NodeId>> adjacency_;
    std::optional<int> grid_side_;
    std::vector<LatticePoint> coords_;
    std::vector<int> dist_;
    std::vector<NodeId> next_;
    int diameter_ = 0;
};

/// Full grid_side x grid_side lattice. Machines are renumbered by (a, b); the
/// remaining lattice points become stages in row-major order.
NetworkLayout build_lattice_layout(int grid_side, std::span<const LatticePoint> machine_coords);

/// m spokes of length `radius` meeting at one centre stage (index m). Spoke j's
/// inner stages are numbered outward from the centre.
NetworkLayout build_star_layout(int machines, int radius);

/// Complete graph on m machines, no stages.
NetworkLayout build_complete_layout(int machines);

/// Index of the centre stage of a layout built by build_star_layout.
inline NodeId star_center(const NetworkLayout& layout) { return layout.machine_count(); }

}  // namespace netrepair
