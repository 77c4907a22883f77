#include "dtn/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dtn/error.hpp"

namespace dtn {

namespace {

constexpr double kSolveTolerance = 1e-12;

void check_boundary_vector(const SquareLattice& lattice, const Vec& ubar) {
    if (ubar.size() != lattice.boundary_count())
        throw ShapeError("boundary datum has " + std::to_string(ubar.size()) + " entries, expected " +
                         std::to_string(lattice.boundary_count()));
}

}  // namespace

void check_conductivity(const SquareLattice& lattice, const Vec& gamma) {
    if (gamma.size() != lattice.edge_count())
        throw ShapeError("conductivity has " + std::to_string(gamma.size()) + " entries, expected " +
                         std::to_string(lattice.edge_count()));
    for (Eigen::Index e = 0; e < gamma.size(); ++e) {
        if (!std::isfinite(gamma[e]) || gamma[e] <= 0.0)
            throw DomainError("conductivity of edge " + std::to_string(e) + " is not positive: " +
                              std::to_string(gamma[e]));
    }
}

LaplacianBlocks assemble_operator(const SquareLattice& lattice, const Vec& gamma) {
    check_conductivity(lattice, gamma);
    const int ni = lattice.interior_count();
    const int nb = lattice.boundary_count();
    const int nn = lattice.node_count();

    std::vector<Eigen::Triplet<double>> full, sigma, coupling;
    LaplacianBlocks out;
    out.boundary_diag = Vec::Zero(nb);

    for (int p = 0; p < ni; ++p) {
        double diag = 0.0;
        for (const auto& [e, q] : lattice.incident(p)) {
            const double g = gamma[e];
            diag += g;
            full.emplace_back(p, q, -g);
            if (q < ni)
                sigma.emplace_back(p, q, -g);
            else
                coupling.emplace_back(p, q - ni, -g);
        }
        full.emplace_back(p, p, diag);
        sigma.emplace_back(p, p, diag);
    }
    for (int k = 0; k < nb; ++k) {
        full.emplace_back(ni + k, ni + k, 1.0);
        out.boundary_diag[k] = gamma[lattice.incident(ni + k).front()[0]];
    }

    out.full.resize(nn, nn);
    out.full.setFromTriplets(full.begin(), full.end());
    out.sigma.resize(ni, ni);
    out.sigma.setFromTriplets(sigma.begin(), sigma.end());
    out.coupling.resize(ni, nb);
    out.coupling.setFromTriplets(coupling.begin(), coupling.end());
    return out;
}

DirichletSolver::DirichletSolver(const SquareLattice& lattice, const Vec& gamma)
    : lattice_(&lattice), blocks_(assemble_operator(lattice, gamma)) {
    llt_.compute(blocks_.sigma);
    if (llt_.info() != Eigen::Success)
        throw NumericalFailure("factorization of the interior Laplacian block failed", NAN);
}

Mat DirichletSolver::solve_interior(const Mat& ubar) const {
    if (ubar.rows() != lattice_->boundary_count())
        throw ShapeError("boundary data have " + std::to_string(ubar.rows()) + " rows, expected " +
                         std::to_string(lattice_->boundary_count()));
    const Mat rhs = -(blocks_.coupling * ubar);
    Mat x = llt_.solve(rhs);
    const Mat r = blocks_.sigma * x - rhs;
    if (r.size() == 0) return x;
    const double sigma_norm = 2.0 * Vec(blocks_.sigma.diagonal()).maxCoeff();
    const double scale = rhs.cwiseAbs().maxCoeff() + sigma_norm * x.cwiseAbs().maxCoeff();
    const double res = r.cwiseAbs().maxCoeff();
    if (!std::isfinite(res) || res > kSolveTolerance * std::max(scale, 1.0))
        throw NumericalFailure("Dirichlet solve residual " + std::to_string(res) + " exceeds tolerance", res);
    return x;
}

Vec DirichletSolver::solve(const Vec& ubar) const {
    check_boundary_vector(*lattice_, ubar);
    Vec u(lattice_->node_count());
    u.head(lattice_->interior_count()) = solve_interior(ubar);
    u.tail(lattice_->boundary_count()) = ubar;
    return u;
}

Vec solve_dirichlet(const SquareLattice& lattice, const Vec& gamma, const Vec& ubar) {
    check_boundary_vector(lattice, ubar);
    return DirichletSolver(lattice, gamma).solve(ubar);
}

Vec neumann_flux(const SquareLattice& lattice, const Vec& gamma, const Vec& u) {
    check_conductivity(lattice, gamma);
    if (u.size() != lattice.node_count())
        throw ShapeError("potential has " + std::to_string(u.size()) + " entries, expected " +
                         std::to_string(lattice.node_count()));
    const int ni = lattice.interior_count();
    Vec v(lattice.boundary_count());
    for (int k = 0; k < lattice.boundary_count(); ++k) {
        const auto& [e, p] = lattice.incident(ni + k).front();
        v[k] = gamma[e] * (u[ni + k] - u[p]);
    }
    return v;
}

Mat green_map(const SquareLattice& lattice, const Vec& gamma) {
    DirichletSolver solver(lattice, gamma);
    const int nb = lattice.boundary_count();
    Mat A(lattice.node_count(), nb);
    A.topRows(lattice.interior_count()) = solver.solve_interior(Mat::Identity(nb, nb));
    A.bottomRows(nb).setIdentity();
    return A;
}

Mat dtn_matrix(const SquareLattice& lattice, const Vec& gamma) {
    const Mat A = green_map(lattice, gamma);
    const int nb = lattice.boundary_count();
    Mat lambda(nb, nb);
    for (int k = 0; k < nb; ++k) lambda.col(k) = neumann_flux(lattice, gamma, A.col(k));
    return lambda;
}

Mat dtn_matrix_schur(const SquareLattice& lattice, const Vec& gamma) {
    const LaplacianBlocks b = assemble_operator(lattice, gamma);
    const Mat sigma = Mat(b.sigma);
    const Mat coupling = Mat(b.coupling);
    Eigen::LLT<Mat> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NumericalFailure("interior Laplacian block is not positive definite", NAN);
    Mat lambda = -coupling.transpose() * llt.solve(coupling);
    lambda.diagonal() += b.boundary_diag;
    return lambda;
}

}  // namespace dtn
