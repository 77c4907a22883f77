#include "dtn/sensitivity.hpp"

#include <cmath>
#include <limits>

#include "dtn/error.hpp"
#include "dtn/linalg.hpp"

namespace dtn {

namespace {

// Row e holds the difference of Green-map rows across edge e.
Mat edge_differences(const SquareLattice& lattice, const Mat& green) {
    Mat d(lattice.edge_count(), green.cols());
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const auto [a, b] = lattice.edge_endpoints(e);
        d.row(e) = green.row(a) - green.row(b);
    }
    return d;
}

Mat jacobian_rows(const Mat& d0, const Mat& d1, const std::vector<std::pair<int, int>>& rows) {
    Mat s(static_cast<Eigen::Index>(rows.size()), d0.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto [i, j] = rows[r];
        s.row(static_cast<Eigen::Index>(r)) = d0.col(i).cwiseProduct(d1.col(j)).transpose();
    }
    return s;
}

void check_mask(const SquareLattice& lattice, const DataMask& mask) {
    const int m = lattice.boundary_count();
    if (mask.known.rows() != m || mask.known.cols() != m)
        throw ShapeError("mask must be " + std::to_string(m) + " x " + std::to_string(m));
    if (mask.count() == 0) throw DomainError("mask is empty");
}

// Dense Laplacian blocks for an arbitrary (possibly signed) edge vector; the
// Taylor coefficients of a conductivity path need not be positive.
struct DenseBlocks {
    Mat sigma;
    Mat coupling;
    Vec boundary_diag;
};

DenseBlocks dense_blocks(const SquareLattice& lattice, const Vec& c) {
    const int ni = lattice.interior_count();
    const int nb = lattice.boundary_count();
    DenseBlocks out{Mat::Zero(ni, ni), Mat::Zero(ni, nb), Vec::Zero(nb)};
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const auto [a, b] = lattice.edge_endpoints(e);
        for (const auto& [p, q] : {std::pair{a, b}, std::pair{b, a}}) {
            if (p >= ni) {
                out.boundary_diag[p - ni] += c[e];
                continue;
            }
            out.sigma(p, p) += c[e];
            if (q < ni)
                out.sigma(p, q) -= c[e];
            else
                out.coupling(p, q - ni) -= c[e];
        }
    }
    return out;
}

PseudoInverse checked_pinv(const Mat& s, double rel_cutoff) {
    PseudoInverse pinv = pseudo_inverse(s, rel_cutoff);
    if (pinv.rank < s.cols())
        throw RankDeficiency("restricted Jacobian has rank " + std::to_string(pinv.rank) + " < " +
                                 std::to_string(s.cols()) + " (sigma_min/sigma_max = " +
                                 std::to_string(pinv.sigma_max > 0 ? pinv.sigma_min / pinv.sigma_max : 0.0) + ")",
                             pinv.sigma_min);
    return pinv;
}

}  // namespace

Mat jacobian(const SquareLattice& lattice, const Vec& gamma) {
    const Mat d = edge_differences(lattice, green_map(lattice, gamma));
    return jacobian_rows(d, d, build_mask("full", lattice.n()).indices());
}

Mat restrict_rows(const Mat& s, const DataMask& mask) {
    const int m = 4 * mask.n;
    if (s.rows() != static_cast<Eigen::Index>(m) * m) throw ShapeError("Jacobian row count does not match the mask");
    if (mask.count() == 0) throw DomainError("mask is empty");
    const auto idx = mask.indices();
    Mat out(static_cast<Eigen::Index>(idx.size()), s.cols());
    for (std::size_t r = 0; r < idx.size(); ++r)
        out.row(static_cast<Eigen::Index>(r)) = s.row(static_cast<Eigen::Index>(idx[r].first) * m + idx[r].second);
    return out;
}

Vec restrict_values(const Mat& lambda, const DataMask& mask) {
    if (lambda.rows() != mask.known.rows() || lambda.cols() != mask.known.cols())
        throw ShapeError("matrix shape does not match the mask");
    const auto idx = mask.indices();
    Vec out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) out[static_cast<Eigen::Index>(r)] = lambda(idx[r].first, idx[r].second);
    return out;
}

RankReport rank_report(const Mat& s_restricted, double rel_cutoff) {
    const PseudoInverse pinv = pseudo_inverse(s_restricted, rel_cutoff);
    return {pinv.rank, static_cast<int>(s_restricted.cols()), pinv.sigma_max, pinv.sigma_min};
}

Vec first_order_prediction(const Mat& s_restricted, const Vec& v, double rel_cutoff) {
    if (v.size() != s_restricted.rows()) throw ShapeError("noise direction length does not match the mask");
    return checked_pinv(s_restricted, rel_cutoff).matrix * v;
}

LeastSquaresResult masked_least_squares(const SquareLattice& lattice, const Mat& data, const DataMask& mask,
                                        const Vec& gamma0, const LeastSquaresOptions& options) {
    check_mask(lattice, mask);
    check_conductivity(lattice, gamma0);
    if (data.rows() != mask.known.rows() || data.cols() != mask.known.cols())
        throw ShapeError("data shape does not match the mask");
    const auto rows = mask.indices();
    const Vec target = restrict_values(data, mask);

    auto evaluate = [&](const Vec& g, Mat* jac) {
        const Mat d = edge_differences(lattice, green_map(lattice, g));
        const Mat lambda = d.transpose() * g.asDiagonal() * d;
        if (jac) *jac = jacobian_rows(d, d, rows);
        return Vec(restrict_values(lambda, mask) - target);
    };

    LeastSquaresResult out;
    Vec gamma = gamma0;
    Mat jac;
    Vec r = evaluate(gamma, &jac);
    double cost = r.squaredNorm();
    double damping = -1.0;
    double growth = 2.0;
    const double floor = std::numeric_limits<double>::min();

    for (int it = 0; it < options.max_iters; ++it) {
        out.iterations = it;
        Eigen::BDCSVD<Mat> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vec& s = svd.singularValues();
        const double smax = s.size() ? s[0] : 0.0;
        const Vec grad = jac.transpose() * r;
        // Residuals at round-off level cannot be made orthogonal to the Jacobian,
        // hence the floor proportional to the data size.
        const double residual_scale = std::sqrt(cost) + std::numeric_limits<double>::epsilon() * target.norm();
        if (cost <= floor || grad.norm() <= options.gradient_tol * smax * residual_scale) {
            out.converged = true;
            break;
        }
        if (damping < 0.0) damping = options.initial_damping * smax * smax;
        const Vec ur = svd.matrixU().transpose() * r;

        bool accepted = false;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            const Vec filter = (s.array() / (s.array().square() + damping)).matrix();
            Vec step = -(svd.matrixV() * filter.cwiseProduct(ur));
            while ((gamma + step).minCoeff() <= 0.0) step *= 0.5;
            const Vec trial = gamma + step;
            Mat trial_jac;
            const Vec trial_r = evaluate(trial, &trial_jac);
            const double trial_cost = trial_r.squaredNorm();
            const double predicted = cost - (r + jac * step).squaredNorm();
            if (trial_cost < cost && predicted > 0.0) {
                // Gain-ratio damping update (Nielsen).
                const double rho = (cost - trial_cost) / predicted;
                const bool stalled = step.norm() <= 1e-14 * gamma.norm();
                gamma = trial;
                r = trial_r;
                jac = std::move(trial_jac);
                cost = trial_cost;
                damping *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                damping = std::max(damping, 1e-20 * smax * smax);
                growth = 2.0;
                accepted = true;
                if (stalled) out.converged = true;
            } else {
                damping *= growth;
                growth *= 2.0;
            }
        }
        if (out.converged) {
            out.iterations = it + 1;
            break;
        }
        if (!accepted) {
            // The cost no longer resolves the decrease; fall back on the gradient
            // norm and take the plain Gauss-Newton step while it keeps shrinking.
            const Vec filter = (s.array() > kPinvCutoff * smax).select(s.array().inverse(), 0.0).matrix();
            const Vec trial = gamma - svd.matrixV() * filter.cwiseProduct(ur);
            if (trial.minCoeff() > 0.0) {
                Mat trial_jac;
                const Vec trial_r = evaluate(trial, &trial_jac);
                if ((trial_jac.transpose() * trial_r).norm() < 0.5 * grad.norm()) {
                    gamma = trial;
                    r = trial_r;
                    jac = std::move(trial_jac);
                    cost = r.squaredNorm();
                    out.iterations = it + 1;
                    continue;
                }
            }
            out.converged = true;
            break;
        }
        out.iterations = it + 1;
    }
    out.gamma = gamma;
    out.residual = std::sqrt(cost);
    return out;
}

LeastSquaresResult noise_path_least_squares(const SquareLattice& lattice, const Mat& exact, const Mat& noise,
                                            const DataMask& mask, const Vec& gamma_exact, int steps,
                                            const LeastSquaresOptions& options) {
    if (steps < 1) throw InvalidArgument("continuation needs at least one step");
    if (noise.rows() != exact.rows() || noise.cols() != exact.cols()) throw ShapeError("noise shape differs from data");
    Vec previous = gamma_exact;
    LeastSquaresResult current{gamma_exact, 0.0, 0, true};
    int total = 0;
    for (int k = 1; k <= steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        Vec start = 2.0 * current.gamma - previous;
        for (int halving = 0; halving < 20 && start.minCoeff() <= 0.0; ++halving)
            start = current.gamma + 0.5 * (start - current.gamma);
        if (start.minCoeff() <= 0.0) start = current.gamma;
        previous = current.gamma;
        current = masked_least_squares(lattice, exact + s * noise, mask, start, options);
        total += current.iterations;
    }
    current.iterations = total;
    return current;
}

std::vector<Vec> derivative_series(const SquareLattice& lattice, const Vec& gamma, const DataMask& mask, const Vec& v,
                                   int max_order, double rel_cutoff) {
    std::vector<Vec> out;
    for (int k = 1; k <= max_order; ++k) out.push_back(higher_order_derivative(lattice, gamma, mask, v, k, out, rel_cutoff));
    return out;
}

Vec higher_order_derivative(const SquareLattice& lattice, const Vec& gamma, const DataMask& mask, const Vec& v,
                            int order, const std::vector<Vec>& lower, double rel_cutoff) {
    check_conductivity(lattice, gamma);
    check_mask(lattice, mask);
    if (order < 1) throw InvalidArgument("derivative order must be >= 1");
    if (static_cast<int>(lower.size()) < order - 1)
        throw InvalidArgument("derivatives of orders 1.." + std::to_string(order - 1) + " are required");
    const auto rows = mask.indices();
    if (v.size() != static_cast<Eigen::Index>(rows.size())) throw ShapeError("noise direction length does not match the mask");

    const int k = order;
    const int ni = lattice.interior_count();
    const int nb = lattice.boundary_count();

    // Taylor coefficients c_l = gamma^(l) / l! of the conductivity path.
    std::vector<Vec> c{gamma};
    double factorial = 1.0;
    for (int l = 1; l < k; ++l) {
        factorial *= l;
        if (lower[static_cast<std::size_t>(l - 1)].size() != gamma.size())
            throw ShapeError("derivative of order " + std::to_string(l) + " has the wrong length");
        c.push_back(lower[static_cast<std::size_t>(l - 1)] / factorial);
    }
    std::vector<DenseBlocks> blocks;
    for (const Vec& cl : c) blocks.push_back(dense_blocks(lattice, cl));

    Eigen::LLT<Mat> llt(blocks[0].sigma);
    if (llt.info() != Eigen::Success) throw NumericalFailure("interior Laplacian block is not positive definite", NAN);

    // Interior Green block X(s) satisfies Sigma(s) X(s) = -B(s).
    auto interior_coefficient = [&](const std::vector<Mat>& x, int l, bool with_own_term) {
        Mat rhs = Mat::Zero(ni, nb);
        if (with_own_term) rhs -= blocks[static_cast<std::size_t>(l)].coupling;
        for (int t = 1; t <= l; ++t) {
            if (t >= static_cast<int>(blocks.size())) continue;
            rhs -= blocks[static_cast<std::size_t>(t)].sigma * x[static_cast<std::size_t>(l - t)];
        }
        return Mat(llt.solve(rhs));
    };
    // Lambda(s) = C(s) + B(s)^T X(s).
    auto dtn_coefficient = [&](const std::vector<Mat>& x, int l, bool with_own_term) {
        Mat lam = Mat::Zero(nb, nb);
        if (with_own_term) lam.diagonal() += blocks[static_cast<std::size_t>(l)].boundary_diag;
        for (int t = 0; t <= l; ++t) {
            if (t >= static_cast<int>(blocks.size()) || (t == l && !with_own_term && l > 0)) continue;
            lam += blocks[static_cast<std::size_t>(t)].coupling.transpose() * x[static_cast<std::size_t>(l - t)];
        }
        return lam;
    };

    std::vector<Mat> x;
    std::vector<Mat> d;  // edge differences of the Green-map coefficients
    std::vector<Vec> r;  // residual coefficients over the mask
    for (int l = 0; l < k; ++l) {
        x.push_back(interior_coefficient(x, l, true));
        Mat a(lattice.node_count(), nb);
        a.topRows(ni) = x.back();
        if (l == 0) a.bottomRows(nb).setIdentity();
        else a.bottomRows(nb).setZero();
        d.push_back(edge_differences(lattice, a));
        Vec rl = restrict_values(dtn_coefficient(x, l, true), mask);
        if (l == 1) rl -= v;
        r.push_back(rl);
    }

    auto jacobian_coefficient = [&](int l) {
        Mat s = Mat::Zero(static_cast<Eigen::Index>(rows.size()), lattice.edge_count());
        for (int t = 0; t <= l; ++t) s += jacobian_rows(d[static_cast<std::size_t>(t)], d[static_cast<std::size_t>(l - t)], rows);
        return s;
    };

    const Mat j0 = jacobian_rows(d[0], d[0], rows);
    const PseudoInverse pinv = checked_pinv(j0, rel_cutoff);

    // Order-k coefficient with c_k = 0; the c_k part is J0 c_k.
    x.push_back(interior_coefficient(x, k, false));
    Vec h = -restrict_values(dtn_coefficient(x, k, false), mask);
    if (k == 1) h += v;
    Vec coupling_term = Vec::Zero(lattice.edge_count());
    for (int l = 1; l < k; ++l) coupling_term += jacobian_coefficient(l).transpose() * r[static_cast<std::size_t>(k - l)];
    if (k > 1) h -= pinv.matrix.transpose() * coupling_term;

    double k_factorial = 1.0;
    for (int l = 2; l <= k; ++l) k_factorial *= l;
    return k_factorial * (pinv.matrix * h);
}

}  // namespace dtn
