#include "dtn/curtis_morrow.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dtn/error.hpp"
#include "dtn/linalg.hpp"

namespace dtn {

namespace {

constexpr double kSpanCutoff = 1e-10;
constexpr double kCompletionCutoff = 1e-12;

std::vector<char> zero_closure(const SquareLattice& lattice, const std::vector<int>& positions) {
    const int ni = lattice.interior_count();
    std::vector<char> zero(static_cast<std::size_t>(lattice.node_count()), 0);
    for (int k : positions) {
        zero[static_cast<std::size_t>(ni + k)] = 1;
        zero[static_cast<std::size_t>(lattice.incident(ni + k).front()[1])] = 1;
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (int p = 0; p < ni; ++p) {
            if (!zero[static_cast<std::size_t>(p)]) continue;
            int unknown = -1;
            int count = 0;
            for (const auto& [e, q] : lattice.incident(p)) {
                (void)e;
                if (!zero[static_cast<std::size_t>(q)]) {
                    unknown = q;
                    ++count;
                }
            }
            if (count == 1) {
                zero[static_cast<std::size_t>(unknown)] = 1;
                changed = true;
            }
        }
    }
    return zero;
}

// Projector onto the complement of span{e_z, Lambda_z : z in Z}.
Mat arc_projector(const Mat& lambda, const BoundaryArc& arc) {
    const Eigen::Index m = lambda.rows();
    Mat span(m, 2 * static_cast<Eigen::Index>(arc.positions.size()));
    for (std::size_t t = 0; t < arc.positions.size(); ++t) {
        const int z = arc.positions[t];
        span.col(static_cast<Eigen::Index>(2 * t)) = Vec::Unit(m, z);
        span.col(static_cast<Eigen::Index>(2 * t + 1)) = lambda.row(z).transpose();
    }
    return complement_projector(span, kSpanCutoff);
}

}  // namespace

std::vector<BoundaryArc> boundary_arcs(const SquareLattice& lattice) {
    const int m = lattice.boundary_count();
    std::vector<BoundaryArc> arcs;
    for (int len = 1; 2 * len < m; ++len) {
        for (int s = 0; s < m; ++s) {
            BoundaryArc arc;
            arc.start = s;
            arc.length = len;
            for (int t = 0; t < len; ++t) arc.positions.push_back((s + t) % m);
            arc.zero = zero_closure(lattice, arc.positions);
            arcs.push_back(std::move(arc));
        }
    }
    return arcs;
}

ReconstructionResult reconstruct(const SquareLattice& lattice, const Mat& lambda) {
    const int m = lattice.boundary_count();
    const int ni = lattice.interior_count();
    if (lambda.rows() != m || lambda.cols() != m)
        throw ShapeError("DtN matrix must be " + std::to_string(m) + " x " + std::to_string(m));
    if (!lambda.allFinite()) throw DomainError("DtN matrix has non-finite entries");

    const std::vector<BoundaryArc> arcs = boundary_arcs(lattice);
    std::map<std::pair<int, int>, std::size_t> arc_at;  // (start, length) -> arc
    for (std::size_t a = 0; a < arcs.size(); ++a) arc_at[{arcs[a].start, arcs[a].length}] = a;

    std::vector<Mat> projectors(arcs.size());
    auto projector = [&](std::size_t a) -> const Mat& {
        if (projectors[a].size() == 0) projectors[a] = arc_projector(lambda, arcs[a]);
        return projectors[a];
    };
    auto reaches = [&](int start, int length, int node) {
        const auto it = arc_at.find({((start % m) + m) % m, length});
        return it != arc_at.end() && arcs[it->second].zero[static_cast<std::size_t>(node)];
    };

    ReconstructionResult out;
    out.gamma = Vec::Constant(lattice.edge_count(), NAN);
    std::vector<char> known(static_cast<std::size_t>(lattice.edge_count()), 0);
    auto flag = [&](int e, const std::string& reason) { out.degenerate.push_back({e, reason}); };

    // Boundary conductances from minimal arcs that exclude the edge's boundary
    // node but whose zero set contains its interior endpoint.
    for (int k = 0; k < m; ++k) {
        const auto& [e, p] = lattice.incident(ni + k).front();
        double num = 0.0, den = 0.0;
        for (std::size_t a = 0; a < arcs.size(); ++a) {
            const BoundaryArc& arc = arcs[a];
            if (!arc.zero[static_cast<std::size_t>(p)]) continue;
            if (std::find(arc.positions.begin(), arc.positions.end(), k) != arc.positions.end()) continue;
            if (arc.length > 1 && (reaches(arc.start + 1, arc.length - 1, p) || reaches(arc.start, arc.length - 1, p)))
                continue;
            const Mat& P = projector(a);
            const Vec pe = P.col(k);
            const Vec pl = P * lambda.row(k).transpose();
            num += pe.dot(pl);
            den += pe.squaredNorm();
        }
        if (!(den > 1e-14)) {
            flag(e, "no localized boundary response");
            continue;
        }
        out.gamma[e] = num / den;
        known[static_cast<std::size_t>(e)] = 1;
        if (!(out.gamma[e] > 0.0)) flag(e, "nonpositive boundary conductance");
    }

    // Green map rows: boundary rows are unit vectors, outer-ring rows average
    // e_k - Lambda_k / gamma_k over boundary neighbors.
    std::vector<Vec> green(static_cast<std::size_t>(lattice.node_count()));
    for (int k = 0; k < m; ++k) green[static_cast<std::size_t>(ni + k)] = Vec::Unit(m, k);
    std::vector<int> hits(static_cast<std::size_t>(ni), 0);
    for (int k = 0; k < m; ++k) {
        const auto& [e, p] = lattice.incident(ni + k).front();
        if (!known[static_cast<std::size_t>(e)] || out.gamma[e] == 0.0) continue;
        Vec row = Vec::Unit(m, k) - lambda.row(k).transpose() / out.gamma[e];
        auto& g = green[static_cast<std::size_t>(p)];
        if (g.size() == 0) g = Vec::Zero(m);
        g += row;
        ++hits[static_cast<std::size_t>(p)];
    }
    for (int p = 0; p < ni; ++p)
        if (hits[static_cast<std::size_t>(p)] > 0) green[static_cast<std::size_t>(p)] /= hits[static_cast<std::size_t>(p)];

    // Deeper rows: the potential at p is orthogonal to every arc span whose
    // zero set contains p, so it is the common null direction.
    std::vector<Mat> gram(static_cast<std::size_t>(ni));
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        bool any = false;
        for (int p = 0; p < ni && !any; ++p) any = arcs[a].zero[static_cast<std::size_t>(p)] && green[static_cast<std::size_t>(p)].size() == 0;
        if (!any) continue;
        const Mat& P = projector(a);
        for (int p = 0; p < ni; ++p) {
            if (!arcs[a].zero[static_cast<std::size_t>(p)] || green[static_cast<std::size_t>(p)].size() != 0) continue;
            auto& g = gram[static_cast<std::size_t>(p)];
            if (g.size() == 0) g = Mat::Zero(m, m);
            g += P;
        }
    }
    for (int p = 0; p < ni; ++p) {
        if (green[static_cast<std::size_t>(p)].size() != 0) continue;
        const auto& g = gram[static_cast<std::size_t>(p)];
        if (g.size() == 0) throw NumericalFailure("no boundary arc reaches interior node " + to_string(lattice.node_at(p)), NAN);
        Eigen::SelfAdjointEigenSolver<Mat> eig(g);
        Vec x = eig.eigenvectors().col(0);
        const double s = x.sum();
        green[static_cast<std::size_t>(p)] = std::abs(s) > 0.0 ? Vec(x / s) : x;
    }

    // Kirchhoff balance ring by ring, outermost first.
    for (int t = 1; t <= (lattice.n() + 1) / 2; ++t) {
        std::vector<int> nodes;
        for (int p = 0; p < ni; ++p)
            if (lattice.ring(lattice.node_at(p)) == t) nodes.push_back(p);
        std::map<int, int> column;
        for (int p : nodes)
            for (const auto& [e, q] : lattice.incident(p)) {
                (void)q;
                if (!known[static_cast<std::size_t>(e)] && !column.count(e)) column.emplace(e, 0);
            }
        if (column.empty()) continue;
        int c = 0;
        for (auto& [e, col] : column) col = c++;

        const Eigen::Index rows = static_cast<Eigen::Index>(nodes.size()) * m;
        Mat A = Mat::Zero(rows, c);
        Vec b = Vec::Zero(rows);
        for (std::size_t r = 0; r < nodes.size(); ++r) {
            const int p = nodes[r];
            const auto seg = static_cast<Eigen::Index>(r) * m;
            for (const auto& [e, q] : lattice.incident(p)) {
                const Vec diff = green[static_cast<std::size_t>(p)] - green[static_cast<std::size_t>(q)];
                const auto it = column.find(e);
                if (it != column.end())
                    A.block(seg, it->second, m, 1) += diff;
                else
                    b.segment(seg, m) -= out.gamma[e] * diff;
            }
        }
        const double col_scale = A.colwise().norm().maxCoeff();
        const Vec x = least_squares(A, b);
        for (const auto& [e, col] : column) {
            out.gamma[e] = x[col];
            known[static_cast<std::size_t>(e)] = 1;
            if (!(A.col(col).norm() > 1e-12 * col_scale))
                flag(e, "vanishing potential difference across edge");
            else if (!std::isfinite(x[col]))
                flag(e, "non-finite conductance");
            else if (!(x[col] > 0.0))
                flag(e, "nonpositive conductance");
        }
    }
    for (int e = 0; e < lattice.edge_count(); ++e)
        if (!known[static_cast<std::size_t>(e)]) flag(e, "edge not reached by layer peeling");
    return out;
}

CompletionResult complete_dtn(const SquareLattice& lattice, const Mat& values, const DataMask& mask) {
    const int m = lattice.boundary_count();
    if (values.rows() != m || values.cols() != m || mask.known.rows() != m || mask.known.cols() != m)
        throw ShapeError("DtN data and mask must be " + std::to_string(m) + " x " + std::to_string(m));

    CompletionResult out;
    Mat& lam = out.lambda;
    lam = Mat::Zero(m, m);
    BoolMat known = mask.known;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (known(i, j)) lam(i, j) = values(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (!known(i, j) && mask.known(j, i)) {
                lam(i, j) = values(j, i);
                known(i, j) = true;
            }

    const std::vector<BoundaryArc> arcs = boundary_arcs(lattice);
    const int ni = lattice.interior_count();

    bool progress = true;
    while (progress) {
        progress = false;
        for (int i = 0; i < m; ++i) {
            const int p = lattice.incident(ni + i).front()[1];
            for (int j = 0; j < m; ++j) {
                if (i == j || known(i, j)) continue;
                for (const BoundaryArc& arc : arcs) {
                    if (!arc.zero[static_cast<std::size_t>(p)]) continue;
                    const auto& z = arc.positions;
                    if (std::find(z.begin(), z.end(), i) != z.end() || std::find(z.begin(), z.end(), j) != z.end())
                        continue;
                    bool column_known = true;
                    for (int r : z) column_known = column_known && known(r, j);
                    if (!column_known) continue;
                    std::vector<int> w;
                    for (int c = 0; c < m; ++c) {
                        if (c == i || c == j || !known(i, c)) continue;
                        if (std::find(z.begin(), z.end(), c) != z.end()) continue;
                        bool ok = true;
                        for (int r : z) ok = ok && known(r, c);
                        if (ok) w.push_back(c);
                    }
                    if (w.empty()) continue;

                    const auto nz = static_cast<Eigen::Index>(z.size());
                    const auto nw = static_cast<Eigen::Index>(w.size());
                    Mat bzw(nz, nw);
                    Vec czj(nz);
                    Vec aiw(nw);
                    for (Eigen::Index r = 0; r < nz; ++r) {
                        czj[r] = lam(z[static_cast<std::size_t>(r)], j);
                        for (Eigen::Index c = 0; c < nw; ++c)
                            bzw(r, c) = lam(z[static_cast<std::size_t>(r)], w[static_cast<std::size_t>(c)]);
                    }
                    for (Eigen::Index c = 0; c < nw; ++c) aiw[c] = lam(i, w[static_cast<std::size_t>(c)]);
                    const Vec coeff = -(pseudo_inverse(bzw, kCompletionCutoff).matrix * czj);
                    const double v = -aiw.dot(coeff);
                    lam(i, j) = lam(j, i) = v;
                    known(i, j) = known(j, i) = true;
                    out.order.emplace_back(i, j);
                    progress = true;
                    break;
                }
            }
        }
    }

    for (int i = 0; i < m; ++i) {
        if (known(i, i)) continue;
        bool row_known = true;
        double sum = 0.0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            row_known = row_known && known(i, j);
            sum += lam(i, j);
        }
        if (!row_known) continue;
        lam(i, i) = -sum;
        known(i, i) = true;
        out.order.emplace_back(i, i);
    }

    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (!known(i, j))
                throw CompletionFailure("DtN entry (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") cannot be recovered from the given mask",
                                        i, j);
    return out;
}

}  // namespace dtn
