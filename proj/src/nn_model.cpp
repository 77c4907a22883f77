#include "dtn/nn_model.hpp"

#include <cmath>
#include <string>

#include "dtn/error.hpp"

namespace dtn {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw DomainError("alpha must be a finite positive number, got " + std::to_string(alpha));
}

// Hidden activations with one row per sample and one column per node, so the
// per-node vectors used in the edge loops are contiguous.
Mat hidden_layer(const SquareLattice& lattice, const WeightState& w, const Mat& dirichlet) {
    const int ni = lattice.interior_count();
    Mat x(dirichlet.cols(), lattice.node_count());
    x.leftCols(ni).noalias() = dirichlet.transpose() * w.green_block.transpose();
    x.rightCols(lattice.boundary_count()) = dirichlet.transpose();
    return x;
}

// Outputs in the same sample-by-node layout as hidden_layer.
Mat outputs(const SquareLattice& lattice, const Vec& weights, const Mat& x, const Mat& neumann) {
    const int ni = lattice.interior_count();
    Mat y = Mat::Zero(x.rows(), x.cols());
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const auto [a, b] = lattice.edge_endpoints(e);
        const double g = weights[e];
        // Kirchhoff residual for interior endpoints, flux for boundary ones.
        if (a < ni) y.col(a) += g * (x.col(b) - x.col(a));
        else y.col(a) += g * (x.col(a) - x.col(b));
        if (b < ni) y.col(b) += g * (x.col(a) - x.col(b));
        else y.col(b) += g * (x.col(b) - x.col(a));
    }
    y.rightCols(lattice.boundary_count()) -= neumann.transpose();
    return y;
}

Mat effective_mask(const CauchySet& data) {
    if (data.mask.size() == 0) return Mat::Ones(data.neumann.rows(), data.neumann.cols());
    return data.mask;
}

}  // namespace

std::string to_string(InitScheme scheme) {
    return scheme == InitScheme::RandomPositive ? "random-positive" : "warm-start-green";
}

InitScheme parse_init_scheme(const std::string& name) {
    if (name == "random-positive") return InitScheme::RandomPositive;
    if (name == "warm-start-green") return InitScheme::WarmStartGreen;
    throw ConfigError("unknown init scheme '" + name + "'");
}

void check_cauchy_set(const SquareLattice& lattice, const CauchySet& data) {
    const int nb = lattice.boundary_count();
    if (data.dirichlet.rows() != nb || data.neumann.rows() != nb)
        throw ShapeError("Cauchy data must have " + std::to_string(nb) + " rows");
    if (data.dirichlet.cols() != data.neumann.cols())
        throw ShapeError("Dirichlet and Neumann sample counts differ");
    if (data.size() < 1) throw ShapeError("Cauchy set is empty");
    if (data.mask.size() != 0 && (data.mask.rows() != nb || data.mask.cols() != data.neumann.cols()))
        throw ShapeError("Cauchy mask shape does not match the Neumann data");
}

void check_weights(const SquareLattice& lattice, const WeightState& w) {
    if (w.n != lattice.n()) throw ShapeError("weights are for n=" + std::to_string(w.n));
    if (w.green_block.rows() != lattice.interior_count() || w.green_block.cols() != lattice.boundary_count())
        throw ShapeError("green block must be n^2 x 4n");
    if (w.edge_weights.size() != lattice.edge_count())
        throw ShapeError("edge weight vector must have 2n(n+1) entries");
}

Mat first_layer_matrix(const WeightState& w) {
    const Eigen::Index ni = w.green_block.rows();
    const Eigen::Index nb = w.green_block.cols();
    Mat out(ni + nb, nb);
    out.topRows(ni) = w.green_block;
    out.bottomRows(nb).setIdentity();
    return out;
}

Mat second_layer_matrix(const SquareLattice& lattice, const Vec& edge_weights) {
    if (edge_weights.size() != lattice.edge_count())
        throw ShapeError("edge weight vector must have 2n(n+1) entries");
    Mat W = Mat::Zero(lattice.node_count(), lattice.node_count());
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const auto [a, b] = lattice.edge_endpoints(e);
        const double g = edge_weights[e];
        W(a, b) += g;
        W(b, a) += g;
        W(a, a) -= g;
        W(b, b) -= g;
    }
    return W;
}

Vec forward_pass(const SquareLattice& lattice, const WeightState& w, const Vec& ubar, const Vec& vbar) {
    check_weights(lattice, w);
    const int nb = lattice.boundary_count();
    if (ubar.size() != nb || vbar.size() != nb)
        throw ShapeError("boundary vectors must have " + std::to_string(nb) + " entries");
    const Mat x = hidden_layer(lattice, w, ubar);
    return outputs(lattice, w.edge_weights, x, vbar).row(0).transpose();
}

double loss(const SquareLattice& lattice, const WeightState& w, const CauchySet& data, double alpha) {
    check_alpha(alpha);
    check_weights(lattice, w);
    check_cauchy_set(lattice, data);
    const int ni = lattice.interior_count();
    const Mat x = hidden_layer(lattice, w, data.dirichlet);
    const Mat y = outputs(lattice, w.edge_weights, x, data.neumann);
    const Mat mask = effective_mask(data).transpose();
    const double interior = y.leftCols(ni).squaredNorm();
    const double boundary = (y.rightCols(lattice.boundary_count()).array().square() * mask.array()).sum();
    return (boundary + alpha * interior) / (2.0 * static_cast<double>(data.size()));
}

LossGradient loss_and_gradient(const SquareLattice& lattice, const WeightState& w, const CauchySet& data,
                               double alpha) {
    check_alpha(alpha);
    check_weights(lattice, w);
    check_cauchy_set(lattice, data);
    const int ni = lattice.interior_count();
    const int nb = lattice.boundary_count();
    const double m = static_cast<double>(data.size());

    const Mat x = hidden_layer(lattice, w, data.dirichlet);
    const Mat y = outputs(lattice, w.edge_weights, x, data.neumann);
    const Mat mask = effective_mask(data).transpose();

    // r = dC/dy scaled by m.
    Mat r(y.rows(), y.cols());
    r.leftCols(ni) = alpha * y.leftCols(ni);
    r.rightCols(nb) = (y.rightCols(nb).array() * mask.array()).matrix();

    LossGradient out;
    out.loss = (y.leftCols(ni).squaredNorm() * alpha + (y.rightCols(nb).array().square() * mask.array()).sum()) /
               (2.0 * m);

    Mat dx = Mat::Zero(y.rows(), ni);
    out.edge_weights = Vec::Zero(lattice.edge_count());
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const auto [a, b] = lattice.edge_endpoints(e);
        const double g = w.edge_weights[e];
        const auto diff = (x.col(a) - x.col(b)).eval();
        double dg = 0.0;
        // Output at a: interior g (x_b - x_a), boundary g (x_a - x_b).
        if (a < ni) {
            dg -= r.col(a).dot(diff);
            dx.col(a) -= g * r.col(a);
            if (b < ni) dx.col(b) += g * r.col(a);
        } else {
            dg += r.col(a).dot(diff);
            if (b < ni) dx.col(b) -= g * r.col(a);
        }
        // Output at b: interior g (x_a - x_b), boundary g (x_b - x_a).
        if (b < ni) {
            dg += r.col(b).dot(diff);
            dx.col(b) -= g * r.col(b);
            if (a < ni) dx.col(a) += g * r.col(b);
        } else {
            dg -= r.col(b).dot(diff);
            if (a < ni) dx.col(a) -= g * r.col(b);
        }
        out.edge_weights[e] = dg / m;
    }
    // x_int = G u for each sample, so dC/dG = dx^T U^T.
    out.green_block.noalias() = dx.transpose() * data.dirichlet.transpose();
    out.green_block /= m;
    return out;
}

Vec extract_conductivity(const WeightState& w) { return w.edge_weights; }

WeightState init_weights(const SquareLattice& lattice, std::uint64_t seed, const InitOptions& options) {
    if (!(options.gamma_low > 0.0) || !(options.gamma_high > options.gamma_low))
        throw DomainError("initial conductivity range must satisfy 0 < low < high");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> gamma_dist(options.gamma_low, options.gamma_high);

    WeightState w;
    w.n = lattice.n();
    w.seed = seed;
    w.scheme = options.scheme;
    w.edge_weights.resize(lattice.edge_count());
    for (Eigen::Index e = 0; e < w.edge_weights.size(); ++e) w.edge_weights[e] = gamma_dist(rng);

    const int ni = lattice.interior_count();
    const int nb = lattice.boundary_count();
    if (options.scheme == InitScheme::WarmStartGreen) {
        w.green_block = green_map(lattice, w.edge_weights).topRows(ni);
    } else {
        // Mean 1/(4n) per entry so each row sums to about 1, like a harmonic average.
        std::uniform_real_distribution<double> green_dist(0.0, 2.0 / nb);
        w.green_block.resize(ni, nb);
        for (int j = 0; j < nb; ++j)
            for (int i = 0; i < ni; ++i) w.green_block(i, j) = green_dist(rng);
    }
    return w;
}

WeightState weights_from_conductivity(const SquareLattice& lattice, const Vec& gamma) {
    WeightState w;
    w.n = lattice.n();
    w.edge_weights = gamma;
    w.green_block = green_map(lattice, gamma).topRows(lattice.interior_count());
    w.scheme = InitScheme::WarmStartGreen;
    return w;
}

}  // namespace dtn
