#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "dtn/forward.hpp"
#include "dtn/lattice.hpp"

namespace testutil {

inline dtn::Vec random_gamma(const dtn::SquareLattice& lattice, std::uint64_t seed, double lo = 0.5, double hi = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    dtn::Vec g(lattice.edge_count());
    for (auto& x : g) x = dist(rng);
    return g;
}

inline dtn::Mat random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    dtn::Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = dist(rng);
    return m;
}

/// Dense weighted Laplacian over all nodes, built from neighbor lists only.
inline dtn::Mat dense_laplacian(const dtn::SquareLattice& lattice, const dtn::Vec& gamma) {
    const int total = lattice.node_count();
    dtn::Mat l = dtn::Mat::Zero(total, total);
    for (int a = 0; a < total; ++a) {
        const dtn::Node p = lattice.node_at(a);
        for (const dtn::Node& q : lattice.neighbors(p)) {
            const int b = lattice.node_index(q);
            const double w = gamma[lattice.edge_index(p, q)];
            l(a, a) += w;
            l(a, b) -= w;
        }
    }
    return l;
}

/// DtN map by dense elimination: Lambda = L_bb - L_bi L_ii^{-1} L_ib.
inline dtn::Mat dense_dtn(const dtn::SquareLattice& lattice, const dtn::Vec& gamma) {
    const dtn::Mat l = dense_laplacian(lattice, gamma);
    const int ni = lattice.interior_count();
    const int nb = lattice.boundary_count();
    const dtn::Mat lii = l.topLeftCorner(ni, ni);
    const dtn::Mat lib = l.topRightCorner(ni, nb);
    const dtn::Mat lbi = l.bottomLeftCorner(nb, ni);
    const dtn::Mat lbb = l.bottomRightCorner(nb, nb);
    return lbb - lbi * lii.partialPivLu().solve(lib);
}

inline double rel_diff(const dtn::Mat& a, const dtn::Mat& b) {
    const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace testutil
