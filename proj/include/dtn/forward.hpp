#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dtn/lattice.hpp"

namespace dtn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Throws DomainError unless gamma has one finite positive entry per edge.
void check_conductivity(const SquareLattice& lattice, const Vec& gamma);

/// Block pieces of the weighted graph Laplacian.
///
/// `full` acts on the whole node space: interior rows carry the Kirchhoff
/// balance sum_q gamma_pq (u_p - u_q), boundary rows are the identity.
/// `sigma` is the interior-interior block (SPD), `coupling` the
/// interior-boundary block (entries -gamma), `boundary_diag` the conductance of
/// the edge at each boundary node in boundary order.
struct LaplacianBlocks {
    SpMat full;
    SpMat sigma;
    SpMat coupling;
    Vec boundary_diag;
};

LaplacianBlocks assemble_operator(const SquareLattice& lattice, const Vec& gamma);

/// Factorizes the interior block once and reuses it for every boundary datum.
class DirichletSolver {
public:
    DirichletSolver(const SquareLattice& lattice, const Vec& gamma);

    /// Full potential (interior then boundary entries) for boundary datum ubar.
    Vec solve(const Vec& ubar) const;
    /// Interior potentials for many boundary data at once (one column each).
    Mat solve_interior(const Mat& ubar) const;

    const LaplacianBlocks& blocks() const { return blocks_; }

private:
    const SquareLattice* lattice_;
    LaplacianBlocks blocks_;
    Eigen::SimplicialLLT<SpMat> llt_;
};

Vec solve_dirichlet(const SquareLattice& lattice, const Vec& gamma, const Vec& ubar);

/// Boundary flux gamma_qp (u_q - u_p) at every boundary node, in boundary order.
Vec neumann_flux(const SquareLattice& lattice, const Vec& gamma, const Vec& u);

/// DtN matrix assembled column by column from Dirichlet solves of e_k.
Mat dtn_matrix(const SquareLattice& lattice, const Vec& gamma);

/// DtN matrix from the Schur complement C - B^T Sigma^{-1} B (dense).
Mat dtn_matrix_schur(const SquareLattice& lattice, const Vec& gamma);

/// (n^2 + 4n) x 4n map from boundary data to the full potential.
Mat green_map(const SquareLattice& lattice, const Vec& gamma);

}  // namespace dtn
