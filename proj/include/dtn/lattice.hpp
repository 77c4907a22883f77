#pragma once

#include <array>
#include <compare>
#include <string>
#include <vector>

namespace dtn {

/// Lattice coordinate. `i` is the row (0 = top boundary, n+1 = bottom
/// boundary), `j` the column (0 = left boundary, n+1 = right boundary).
struct Node {
    int i = 0;
    int j = 0;

    friend auto operator<=>(const Node&, const Node&) = default;
};

std::string to_string(const Node& p);

enum class Orientation { Horizontal, Vertical };

/// An edge is keyed by its orientation and its anchor: the right node of a
/// horizontal edge, the bottom node of a vertical edge.
struct Edge {
    Orientation orientation = Orientation::Horizontal;
    Node anchor;

    Node first() const;   // left / top endpoint
    Node second() const { return anchor; }
};

/// n x n square resistor lattice with 4n boundary nodes and 2n(n+1) edges.
///
/// Node indices: interior nodes first in row-major order (index (i-1)n + (j-1)),
/// then the 4n boundary nodes in boundary order, so boundary node k (1-based)
/// has node index n^2 + k - 1.
///
/// Boundary order walks the boundary once: right side top to bottom, bottom
/// side right to left, left side bottom to top, top side left to right.
///
/// Edge ids: horizontal edges first, anchor (i, j) with i in 1..n and j in
/// 1..n+1 at id (i-1)(n+1) + (j-1); then vertical edges, anchor (i, j) with
/// i in 1..n+1 and j in 1..n at id n(n+1) + (i-1)n + (j-1).
class SquareLattice {
public:
    explicit SquareLattice(int n);

    int n() const { return n_; }
    int interior_count() const { return n_ * n_; }
    int boundary_count() const { return 4 * n_; }
    int node_count() const { return n_ * n_ + 4 * n_; }
    int edge_count() const { return 2 * n_ * (n_ + 1); }

    bool contains(const Node& p) const;
    bool is_interior(const Node& p) const;
    bool is_boundary(const Node& p) const;

    int node_index(const Node& p) const;
    const Node& node_at(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
    bool is_interior_index(int index) const { return index < interior_count(); }

    const std::vector<Node>& interior_nodes() const { return interior_; }
    const std::vector<Node>& boundary_nodes() const { return boundary_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Boundary node q^(k) for k in 1..4n.
    Node boundary_node(int k) const;
    /// Inverse of boundary_node; returns k in 1..4n.
    int boundary_position(const Node& q) const;

    std::vector<Node> neighbors(const Node& p) const;

    int edge_index(const Node& p, const Node& q) const;
    int edge_index(const Edge& e) const;
    const Edge& edge(int id) const;
    /// Node indices of the two endpoints of edge `id` (first(), second()).
    std::array<int, 2> edge_endpoints(int id) const { return endpoints_.at(static_cast<std::size_t>(id)); }
    std::array<Node, 2> edge_nodes(int id) const;

    /// Edges incident to the node with the given index, as (edge id, neighbor index).
    const std::vector<std::array<int, 2>>& incident(int node_index) const {
        return incident_.at(static_cast<std::size_t>(node_index));
    }

    /// The single edge joining boundary node k (1-based) to the interior.
    int boundary_edge(int k) const;

    /// Rotation by 90 degrees: (i, j) -> (j, n+1-i).
    Node rotate90(const Node& p) const;
    /// Edge id of the rotated edge, for every edge id.
    std::vector<int> edge_rotation90() const;
    /// Boundary position (0-based) of the rotated boundary node, for every 0-based position.
    std::vector<int> boundary_rotation90() const;

    /// Ring depth of a node: 0 on the boundary, 1 on the outermost interior ring.
    int ring(const Node& p) const;

private:
    int n_;
    std::vector<Node> interior_;
    std::vector<Node> boundary_;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 2>> endpoints_;
    std::vector<std::vector<std::array<int, 2>>> incident_;
};

}  // namespace dtn
