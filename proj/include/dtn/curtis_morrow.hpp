#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dtn/forward.hpp"
#include "dtn/mask.hpp"

namespace dtn {

/// Contiguous run of boundary positions (0-based, cyclic) of length < 2n.
struct BoundaryArc {
    int start = 0;
    int length = 0;
    std::vector<int> positions;
    /// Node indices forced to zero potential by zero Dirichlet and zero
    /// Neumann data on the arc (harmonic continuation).
    std::vector<char> zero;
};

/// All arcs of length 1 .. 2n-1, shortest first, then by start position.
std::vector<BoundaryArc> boundary_arcs(const SquareLattice& lattice);

struct DegenerateEdge {
    int edge = 0;
    std::string reason;
};

struct ReconstructionResult {
    Vec gamma;
    std::vector<DegenerateEdge> degenerate;
};

/// Layer-peeling reconstruction from a full DtN matrix.
///
/// 1. Each boundary conductance is read off the response of boundary data that
///    vanish on an arc whose zero set reaches the edge's interior endpoint.
/// 2. Interior potentials of the outer ring follow from the boundary flux,
///    deeper rows of the Green map from the intersection of such zero sets.
/// 3. Edges are then solved ring by ring from Kirchhoff's law, each ring an
///    overdetermined system solved by least squares.
ReconstructionResult reconstruct(const SquareLattice& lattice, const Mat& lambda);

struct CompletionResult {
    Mat lambda;
    /// Entries filled by the submatrix identity, in the order they were found.
    std::vector<std::pair<int, int>> order;
};

/// Completes a DtN matrix from the entries marked in `mask` (other entries of
/// `values` are ignored). Symmetry fills mirrored entries first; remaining
/// off-diagonal entries come from Lambda_ij = -Lambda_iW pinv(Lambda_ZW) Lambda_Zj
/// over boundary arcs Z; diagonals from zero row sums. Throws
/// CompletionFailure naming the first entry that cannot be reached.
CompletionResult complete_dtn(const SquareLattice& lattice, const Mat& values, const DataMask& mask);

}  // namespace dtn
