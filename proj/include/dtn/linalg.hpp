#pragma once

#include <Eigen/Dense>

namespace dtn {

struct PseudoInverse {
    Eigen::MatrixXd matrix;
    int rank = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;  // smallest singular value (kept or not)
};

/// Moore-Penrose pseudoinverse by SVD; singular values below
/// rel_cutoff * sigma_max are treated as zero.
PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a, double rel_cutoff);

/// Minimum-norm least-squares solution, cutoff eps * max(rows, cols) * sigma_max.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Orthogonal projector onto the complement of the column span of `a`,
/// with rank decided by rel_cutoff * sigma_max.
Eigen::MatrixXd complement_projector(const Eigen::MatrixXd& a, double rel_cutoff);

}  // namespace dtn
