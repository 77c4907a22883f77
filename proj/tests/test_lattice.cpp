#include <doctest.h>

#include <algorithm>
#include <set>

#include "dtn/error.hpp"
#include "dtn/lattice.hpp"

using dtn::Node;
using dtn::SquareLattice;

TEST_CASE("lattice counts") {
    const SquareLattice l1(1);
    CHECK(l1.interior_count() == 1);
    CHECK(l1.boundary_count() == 4);
    CHECK(l1.edge_count() == 4);
    CHECK(SquareLattice(2).edge_count() == 12);
    const SquareLattice l10(10);
    CHECK(l10.edge_count() == 220);
    CHECK(l10.boundary_nodes().size() == 40);
    CHECK_THROWS_AS(SquareLattice(0), dtn::InvalidArgument);
}

TEST_CASE("neighbors") {
    const SquareLattice l1(1);
    const std::vector<Node> expect{{0, 1}, {1, 0}, {1, 2}, {2, 1}};
    CHECK(l1.neighbors({1, 1}) == expect);
    const SquareLattice l2(2);
    CHECK(l2.neighbors({0, 1}) == std::vector<Node>{{1, 1}});
    CHECK(l2.neighbors({1, 1}) == expect);
    CHECK_THROWS_AS(l2.neighbors({0, 0}), dtn::InvalidArgument);
    CHECK_THROWS_AS(l2.neighbors({5, 1}), dtn::InvalidArgument);
}

TEST_CASE("degrees: boundary nodes have one interior neighbor, interior nodes four") {
    for (int n = 1; n <= 12; ++n) {
        const SquareLattice l(n);
        long degree_sum = 0;
        for (int a = 0; a < l.node_count(); ++a) {
            const Node p = l.node_at(a);
            const auto nb = l.neighbors(p);
            degree_sum += static_cast<long>(nb.size());
            if (l.is_boundary(p)) {
                REQUIRE(nb.size() == 1);
                CHECK(l.is_interior(nb.front()));
            } else {
                CHECK(nb.size() == 4);
            }
        }
        CHECK(degree_sum == 2L * l.edge_count());
    }
}

TEST_CASE("boundary order") {
    CHECK(SquareLattice(1).boundary_node(1) == Node{1, 2});
    CHECK(SquareLattice(1).boundary_node(3) == Node{1, 0});
    CHECK(SquareLattice(10).boundary_node(40) == Node{0, 10});
    CHECK_THROWS_AS(SquareLattice(3).boundary_node(0), dtn::InvalidArgument);
    CHECK_THROWS_AS(SquareLattice(3).boundary_node(13), dtn::InvalidArgument);

    for (int n = 1; n <= 12; ++n) {
        const SquareLattice l(n);
        std::set<Node> seen;
        for (int k = 1; k <= 4 * n; ++k) {
            const Node q = l.boundary_node(k);
            CHECK(l.is_boundary(q));
            CHECK(l.boundary_position(q) == k);
            CHECK(l.node_index(q) == n * n + k - 1);
            seen.insert(q);
        }
        CHECK(seen.size() == static_cast<std::size_t>(4 * n));
        for (int k = 1; k <= n; ++k) {
            CHECK(l.boundary_node(k) == Node{k, n + 1});
            CHECK(l.boundary_node(n + k) == Node{n + 1, n + 1 - k});
            CHECK(l.boundary_node(2 * n + k) == Node{n + 1 - k, 0});
            CHECK(l.boundary_node(3 * n + k) == Node{0, k});
        }
    }
}

TEST_CASE("edge ids are a stable bijection") {
    const SquareLattice l1(1);
    std::set<int> ids;
    for (const Node& q : l1.neighbors({1, 1})) ids.insert(l1.edge_index({1, 1}, q));
    CHECK(ids == std::set<int>{0, 1, 2, 3});

    const SquareLattice l3(3);
    for (int e = 0; e < l3.edge_count(); ++e) {
        const auto [p, q] = l3.edge_nodes(e);
        CHECK(l3.edge_index(p, q) == e);
        CHECK(l3.edge_index(q, p) == e);
        CHECK(l3.edge_index(l3.edge(e)) == e);
    }
    CHECK_THROWS_AS(l3.edge_index(Node{1, 1}, Node{2, 2}), dtn::InvalidArgument);
    CHECK_THROWS_AS(l3.edge(l3.edge_count()), dtn::InvalidArgument);
}

TEST_CASE("edge anchors: right node of horizontal edges, bottom node of vertical edges") {
    const SquareLattice l(2);
    int horizontal = 0;
    for (int e = 0; e < l.edge_count(); ++e) {
        const auto [p, q] = l.edge_nodes(e);
        const dtn::Edge& edge = l.edge(e);
        if (p.i == q.i) {
            ++horizontal;
            CHECK(edge.orientation == dtn::Orientation::Horizontal);
            CHECK(edge.anchor == Node{p.i, std::max(p.j, q.j)});
        } else {
            CHECK(edge.orientation == dtn::Orientation::Vertical);
            CHECK(edge.anchor == Node{std::max(p.i, q.i), p.j});
        }
    }
    CHECK(horizontal == 6);
}

TEST_CASE("rotation by 90 degrees permutes nodes, edges and boundary positions") {
    for (int n = 1; n <= 6; ++n) {
        const SquareLattice l(n);
        const auto rot = l.edge_rotation90();
        CHECK(std::set<int>(rot.begin(), rot.end()).size() == static_cast<std::size_t>(l.edge_count()));
        for (int e = 0; e < l.edge_count(); ++e) {
            const auto [p, q] = l.edge_nodes(e);
            CHECK(l.edge_index(l.rotate90(p), l.rotate90(q)) == rot[static_cast<std::size_t>(e)]);
        }
        const auto brot = l.boundary_rotation90();
        for (int k = 0; k < 4 * n; ++k)
            CHECK(l.boundary_node(brot[static_cast<std::size_t>(k)] + 1) == l.rotate90(l.boundary_node(k + 1)));
        // four rotations are the identity
        Node p{1, std::min(2, n)};
        Node r = p;
        for (int t = 0; t < 4; ++t) r = l.rotate90(r);
        CHECK(r == p);
    }
}

TEST_CASE("ring depth") {
    const SquareLattice l(6);
    CHECK(l.ring({0, 3}) == 0);
    CHECK(l.ring({1, 1}) == 1);
    CHECK(l.ring({3, 3}) == 3);
    CHECK(l.ring({4, 3}) == 3);
    CHECK(l.ring({6, 2}) == 1);
}
