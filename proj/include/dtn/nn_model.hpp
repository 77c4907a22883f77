#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "dtn/forward.hpp"

namespace dtn {

enum class InitScheme { RandomPositive, WarmStartGreen };

std::string to_string(InitScheme scheme);
InitScheme parse_init_scheme(const std::string& name);

/// Trainable parameters of the two-layer linear network.
///
/// The first layer is [green_block; I]: interior hidden neurons are free
/// combinations of the Dirichlet datum, boundary hidden neurons copy it.
/// The second layer is generated by one weight per edge (see
/// second_layer_matrix), so symmetry and conservation hold by construction.
struct WeightState {
    int n = 0;
    Mat green_block;  // n^2 x 4n
    Vec edge_weights; // 2n(n+1)
    std::uint64_t seed = 0;
    InitScheme scheme = InitScheme::RandomPositive;
};

/// Matched Dirichlet/Neumann samples, one column per sample.
///
/// `mask` has the shape of `neumann`; a zero entry drops that boundary output
/// from the loss (partially observed columns). An empty mask means all ones.
struct CauchySet {
    Mat dirichlet;
    Mat neumann;
    Mat mask;

    Eigen::Index size() const { return dirichlet.cols(); }
};

/// Validates shapes against the lattice; throws ShapeError / DomainError.
void check_cauchy_set(const SquareLattice& lattice, const CauchySet& data);
void check_weights(const SquareLattice& lattice, const WeightState& w);

/// (n^2+4n) x 4n first-layer matrix [green_block; I].
Mat first_layer_matrix(const WeightState& w);

/// Dense second-layer block: the negated weighted graph Laplacian over all
/// nodes. Interior outputs are (W x)_r; boundary outputs are -(W x)_q - vbar_q.
Mat second_layer_matrix(const SquareLattice& lattice, const Vec& edge_weights);

/// Output vector over all nodes: Kirchhoff residual at interior nodes, flux
/// mismatch w (x_q - x_p) - vbar_q at boundary nodes.
Vec forward_pass(const SquareLattice& lattice, const WeightState& w, const Vec& ubar, const Vec& vbar);

/// alpha = +inf is rejected here; the reduced objective lives in sensitivity.
double loss(const SquareLattice& lattice, const WeightState& w, const CauchySet& data, double alpha = 1.0);

struct LossGradient {
    double loss = 0.0;
    Mat green_block;
    Vec edge_weights;
};

LossGradient loss_and_gradient(const SquareLattice& lattice, const WeightState& w, const CauchySet& data,
                               double alpha = 1.0);

Vec extract_conductivity(const WeightState& w);

struct InitOptions {
    InitScheme scheme = InitScheme::RandomPositive;
    double gamma_low = 0.1;
    double gamma_high = 1.0;
};

WeightState init_weights(const SquareLattice& lattice, std::uint64_t seed, const InitOptions& options = {});

/// Weights that reproduce gamma exactly: green_block = interior rows of green_map(gamma).
WeightState weights_from_conductivity(const SquareLattice& lattice, const Vec& gamma);

}  // namespace dtn
