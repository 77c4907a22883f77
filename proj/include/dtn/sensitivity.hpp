#pragma once

#include <vector>

#include "dtn/forward.hpp"
#include "dtn/mask.hpp"

namespace dtn {

/// Jacobian of the DtN map: S[i*4n + j, e] = d(Lambda_ij)/d(gamma_e)
/// = (u_a^(i) - u_b^(i)) (u_a^(j) - u_b^(j)) for edge e = {a, b}, where u^(i)
/// is the potential for boundary datum e_i. Shape 16n^2 x 2n(n+1).
Mat jacobian(const SquareLattice& lattice, const Vec& gamma);

/// Rows of S at the mask entries, in row-major mask order.
Mat restrict_rows(const Mat& s, const DataMask& mask);

/// Entries of a 4n x 4n matrix at the mask, in row-major mask order.
Vec restrict_values(const Mat& lambda, const DataMask& mask);

constexpr double kPinvCutoff = 1e-12;

struct RankReport {
    int rank = 0;
    int columns = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double ratio() const { return sigma_max > 0.0 ? sigma_min / sigma_max : 0.0; }
};

RankReport rank_report(const Mat& s_restricted, double rel_cutoff = kPinvCutoff);

/// gamma'(0) = pinv(S_T') v. Throws RankDeficiency when S_T' loses column rank
/// at the cutoff sigma < rel_cutoff * sigma_max.
Vec first_order_prediction(const Mat& s_restricted, const Vec& v, double rel_cutoff = kPinvCutoff);

struct LeastSquaresOptions {
    int max_iters = 500;
    double gradient_tol = 1e-12;
    double initial_damping = 1e-3;  // relative to sigma_max^2
};

struct LeastSquaresResult {
    Vec gamma;
    double residual = 0.0;  // sqrt of the sum of squared residuals over the mask
    int iterations = 0;
    bool converged = false;
};

/// Minimizes sum over the mask of (Lambda_gamma - data)^2 by damped
/// Gauss-Newton (Levenberg-Marquardt) with step halving to keep gamma > 0.
/// `data` is 4n x 4n; entries outside the mask are ignored. On an exhausted
/// budget the best iterate is returned with converged = false.
LeastSquaresResult masked_least_squares(const SquareLattice& lattice, const Mat& data, const DataMask& mask,
                                        const Vec& gamma0, const LeastSquaresOptions& options = {});

/// Follows the minimizer branch gamma(s) of the masked objective for data
/// exact + s * noise from s = 0 (where gamma = gamma_exact) to s = 1 in
/// `steps` equal increments, each solved by masked_least_squares from a
/// secant extrapolation of the previous two points.
LeastSquaresResult noise_path_least_squares(const SquareLattice& lattice, const Mat& exact, const Mat& noise,
                                            const DataMask& mask, const Vec& gamma_exact, int steps = 5,
                                            const LeastSquaresOptions& options = {});

/// k-th derivative of the minimizer gamma(s) of the masked objective along
/// data Lambda + s v (v over the mask, row-major mask order), at s = 0 where
/// the data are exact. `lower` holds the derivatives of orders 1..k-1.
/// Computed as pinv(S_T') H with H from Taylor recurrences of the Green map.
Vec higher_order_derivative(const SquareLattice& lattice, const Vec& gamma, const DataMask& mask, const Vec& v,
                            int order, const std::vector<Vec>& lower, double rel_cutoff = kPinvCutoff);

/// Derivatives of orders 1..max_order (element k-1 is order k).
std::vector<Vec> derivative_series(const SquareLattice& lattice, const Vec& gamma, const DataMask& mask, const Vec& v,
                                   int max_order, double rel_cutoff = kPinvCutoff);

}  // namespace dtn
