#include "dtn/lattice.hpp"

#include <algorithm>
#include <cstdlib>

#include "dtn/error.hpp"

namespace dtn {

std::string to_string(const Node& p) {
    return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
}

Node Edge::first() const {
    if (orientation == Orientation::Horizontal) return {anchor.i, anchor.j - 1};
    return {anchor.i - 1, anchor.j};
}

SquareLattice::SquareLattice(int n) : n_(n) {
    if (n < 1) throw InvalidArgument("lattice size must be >= 1, got " + std::to_string(n));

    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) interior_.push_back({i, j});
    for (int k = 1; k <= 4 * n; ++k) boundary_.push_back(boundary_node(k));

    nodes_ = interior_;
    nodes_.insert(nodes_.end(), boundary_.begin(), boundary_.end());

    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n + 1; ++j) edges_.push_back({Orientation::Horizontal, {i, j}});
    for (int i = 1; i <= n + 1; ++i)
        for (int j = 1; j <= n; ++j) edges_.push_back({Orientation::Vertical, {i, j}});

    incident_.resize(static_cast<std::size_t>(node_count()));
    for (int id = 0; id < edge_count(); ++id) {
        const Edge& e = edges_[static_cast<std::size_t>(id)];
        const int a = node_index(e.first());
        const int b = node_index(e.second());
        endpoints_.push_back({a, b});
        incident_[static_cast<std::size_t>(a)].push_back({id, b});
        incident_[static_cast<std::size_t>(b)].push_back({id, a});
    }
}

bool SquareLattice::is_interior(const Node& p) const {
    return p.i >= 1 && p.i <= n_ && p.j >= 1 && p.j <= n_;
}

bool SquareLattice::is_boundary(const Node& p) const {
    const bool on_row_side = (p.i == 0 || p.i == n_ + 1) && p.j >= 1 && p.j <= n_;
    const bool on_col_side = (p.j == 0 || p.j == n_ + 1) && p.i >= 1 && p.i <= n_;
    return on_row_side || on_col_side;
}

bool SquareLattice::contains(const Node& p) const { return is_interior(p) || is_boundary(p); }

int SquareLattice::node_index(const Node& p) const {
    if (is_interior(p)) return (p.i - 1) * n_ + (p.j - 1);
    if (is_boundary(p)) return n_ * n_ + boundary_position(p) - 1;
    throw InvalidArgument("node " + to_string(p) + " is outside the lattice");
}

Node SquareLattice::boundary_node(int k) const {
    const int n = n_;
    if (k < 1 || k > 4 * n)
        throw InvalidArgument("boundary index " + std::to_string(k) + " outside 1.." + std::to_string(4 * n));
    if (k <= n) return {k, n + 1};
    if (k <= 2 * n) return {n + 1, n + 1 - (k - n)};
    if (k <= 3 * n) return {n + 1 - (k - 2 * n), 0};
    return {0, k - 3 * n};
}

int SquareLattice::boundary_position(const Node& q) const {
    const int n = n_;
    if (!is_boundary(q)) throw InvalidArgument("node " + to_string(q) + " is not a boundary node");
    if (q.j == n + 1) return q.i;
    if (q.i == n + 1) return n + (n + 1 - q.j);
    if (q.j == 0) return 2 * n + (n + 1 - q.i);
    return 3 * n + q.j;
}

std::vector<Node> SquareLattice::neighbors(const Node& p) const {
    if (!contains(p)) throw InvalidArgument("node " + to_string(p) + " is outside the lattice");
    std::vector<Node> out;
    const int idx = node_index(p);
    for (const auto& [edge_id, other] : incident(idx)) {
        (void)edge_id;
        out.push_back(node_at(other));
    }
    std::sort(out.begin(), out.end());
    return out;
}

int SquareLattice::edge_index(const Node& p, const Node& q) const {
    if (!contains(p) || !contains(q))
        throw InvalidArgument("edge endpoint outside the lattice: " + to_string(p) + "-" + to_string(q));
    const int di = std::abs(p.i - q.i);
    const int dj = std::abs(p.j - q.j);
    if (di + dj != 1)
        throw InvalidArgument("nodes " + to_string(p) + " and " + to_string(q) + " are not adjacent");
    if (di == 0) {
        const Node anchor = p.j > q.j ? p : q;
        return edge_index(Edge{Orientation::Horizontal, anchor});
    }
    const Node anchor = p.i > q.i ? p : q;
    return edge_index(Edge{Orientation::Vertical, anchor});
}

int SquareLattice::edge_index(const Edge& e) const {
    const int n = n_;
    const Node& a = e.anchor;
    if (e.orientation == Orientation::Horizontal) {
        if (a.i < 1 || a.i > n || a.j < 1 || a.j > n + 1)
            throw InvalidArgument("no horizontal edge anchored at " + to_string(a));
        return (a.i - 1) * (n + 1) + (a.j - 1);
    }
    if (a.i < 1 || a.i > n + 1 || a.j < 1 || a.j > n)
        throw InvalidArgument("no vertical edge anchored at " + to_string(a));
    return n * (n + 1) + (a.i - 1) * n + (a.j - 1);
}

const Edge& SquareLattice::edge(int id) const {
    if (id < 0 || id >= edge_count()) throw InvalidArgument("edge id " + std::to_string(id) + " out of range");
    return edges_[static_cast<std::size_t>(id)];
}

std::array<Node, 2> SquareLattice::edge_nodes(int id) const {
    if (id < 0 || id >= edge_count()) throw InvalidArgument("edge id " + std::to_string(id) + " out of range");
    const Edge& e = edges_[static_cast<std::size_t>(id)];
    return {e.first(), e.second()};
}

int SquareLattice::boundary_edge(int k) const {
    const int idx = node_index(boundary_node(k));
    return incident(idx).front()[0];
}

Node SquareLattice::rotate90(const Node& p) const { return {p.j, n_ + 1 - p.i}; }

std::vector<int> SquareLattice::edge_rotation90() const {
    std::vector<int> perm(static_cast<std::size_t>(edge_count()));
    for (int id = 0; id < edge_count(); ++id) {
        const auto [a, b] = edge_nodes(id);
        perm[static_cast<std::size_t>(id)] = edge_index(rotate90(a), rotate90(b));
    }
    return perm;
}

std::vector<int> SquareLattice::boundary_rotation90() const {
    std::vector<int> perm(static_cast<std::size_t>(boundary_count()));
    for (int k = 1; k <= boundary_count(); ++k)
        perm[static_cast<std::size_t>(k - 1)] = boundary_position(rotate90(boundary_node(k))) - 1;
    return perm;
}

int SquareLattice::ring(const Node& p) const {
    if (is_boundary(p)) return 0;
    return std::min({p.i, p.j, n_ + 1 - p.i, n_ + 1 - p.j});
}

}  // namespace dtn
