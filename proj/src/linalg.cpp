#include "dtn/linalg.hpp"

#include <algorithm>
#include <limits>

namespace dtn {

PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a, double rel_cutoff) {
    PseudoInverse out;
    out.matrix = Eigen::MatrixXd::Zero(a.cols(), a.rows());
    if (a.size() == 0) return out;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    out.sigma_max = s.size() ? s[0] : 0.0;
    out.sigma_min = s.size() ? s[s.size() - 1] : 0.0;
    const double cutoff = rel_cutoff * out.sigma_max;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > cutoff && s[i] > 0.0) {
            inv[i] = 1.0 / s[i];
            ++out.rank;
        }
    }
    out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return out;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    const double rel = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(a.rows(), a.cols()));
    return pseudo_inverse(a, rel).matrix * b;
}

Eigen::MatrixXd complement_projector(const Eigen::MatrixXd& a, double rel_cutoff) {
    const Eigen::Index m = a.rows();
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m);
    if (a.size() == 0) return p;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return p;
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > rel_cutoff * s[0]) ++rank;
    const Eigen::MatrixXd q = svd.matrixU().leftCols(rank);
    p.noalias() -= q * q.transpose();
    return p;
}

}  // namespace dtn
