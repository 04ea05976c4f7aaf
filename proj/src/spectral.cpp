#include "koopman/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace koopman {

SpectralDecomposition decompose(const Mat& K, double unit_tol) {
    if (!K.allFinite()) throw ValidationError("decompose: K has non-finite entries");
    if (K.rows() != K.cols()) throw ValidationError("decompose: K must be square");

    Eigen::EigenSolver<Mat> solver(K);
    if (solver.info() != Eigen::Success) {
        Eigen::JacobiSVD<Mat> svd(K);
        const Vec& sv = svd.singularValues();
        const double cond =
            sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
        std::ostringstream msg;
        msg << "decompose: eigensolver failed (condition estimate " << cond << ")";
        throw NumericalError(msg.str());
    }

    const CVec raw_vals = solver.eigenvalues();
    const CMat raw_vecs = solver.eigenvectors();
    const Index n = raw_vals.size();

    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double ma = std::abs(raw_vals[a]);
        const double mb = std::abs(raw_vals[b]);
        if (ma != mb) return ma > mb;
        return std::abs(raw_vals[a] - 1.0) < std::abs(raw_vals[b] - 1.0);
    });

    SpectralDecomposition spec;
    spec.unit_tol = unit_tol;
    spec.eigenvalues.resize(n);
    spec.eigenvectors.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        spec.eigenvalues[i] = raw_vals[order[i]];
        CVec v = raw_vecs.col(order[i]);
        v /= v.norm();
        // rotate the maximum-modulus entry to be real positive
        Index imax = 0;
        double best = -1.0;
        for (Index j = 0; j < n; ++j) {
            const double m = std::abs(v[j]);
            if (m > best) {
                best = m;
                imax = j;
            }
        }
        const Complex phase = v[imax] / std::abs(v[imax]);
        spec.eigenvectors.col(i) = v * std::conj(phase);
        if (std::abs(spec.eigenvalues[i] - 1.0) < unit_tol) spec.unit_cluster.push_back(i);
    }
    return spec;
}

SpectralDecomposition decompose(const KoopmanModel& model, double unit_tol) {
    return decompose(model.K, unit_tol);
}

Index unit_multiplicity(const SpectralDecomposition& spec, double rank_tol) {
    if (spec.unit_cluster.empty()) return 0;
    CMat U(spec.eigenvectors.rows(), static_cast<Index>(spec.unit_cluster.size()));
    for (Index i = 0; i < U.cols(); ++i)
        U.col(i) = spec.eigenvectors.col(spec.unit_cluster[i]);
    Eigen::JacobiSVD<CMat> svd(U);
    const Vec& sv = svd.singularValues();
    const double cutoff = rank_tol * sv[0];
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) ++rank;
    return rank;
}

std::vector<Vec> GridBox::nodes() const {
    if (resolution < 2) throw ValidationError("GridBox: resolution must be >= 2 per axis");
    const Index d = lower.size();
    if (upper.size() != d) throw ValidationError("GridBox: lower/upper size mismatch");
    for (Index i = 0; i < d; ++i)
        if (lower[i] >= upper[i]) throw ValidationError("GridBox: lower must be < upper");

    long total = 1;
    for (Index i = 0; i < d; ++i) total *= resolution;
    std::vector<Vec> out;
    out.reserve(total);
    std::vector<int> idx(d, 0);
    for (long k = 0; k < total; ++k) {
        Vec p(d);
        for (Index i = 0; i < d; ++i)
            p[i] = lower[i] + (upper[i] - lower[i]) * idx[i] / (resolution - 1);
        out.push_back(p);
        for (Index i = 0; i < d; ++i) {
            if (++idx[i] < resolution) break;
            idx[i] = 0;
        }
    }
    return out;
}

Mat GridBox::node_matrix() const {
    const auto pts = nodes();
    Mat m(lower.size(), static_cast<Index>(pts.size()));
    for (Index j = 0; j < m.cols(); ++j) m.col(j) = pts[j];
    return m;
}

GridBox bounding_grid(const Mat& states, double inflate, int resolution) {
    if (states.cols() < 1) throw ValidationError("bounding_grid: no states");
    GridBox box;
    box.lower = states.rowwise().minCoeff();
    box.upper = states.rowwise().maxCoeff();
    const Vec pad = 0.5 * inflate * (box.upper - box.lower);
    box.lower -= pad;
    box.upper += pad;
    for (Index i = 0; i < box.lower.size(); ++i) {
        if (box.lower[i] >= box.upper[i]) {  // flat axis: open it up a little
            box.lower[i] -= 0.5;
            box.upper[i] += 0.5;
        }
    }
    box.resolution = resolution;
    return box;
}

EigenfunctionField eigenfunction_field(const KoopmanModel& model, const CVec& eigvec,
                                       const GridBox& grid, Complex eigenvalue) {
    if (eigvec.size() != model.dictionary.size())
        throw ValidationError("eigenfunction_field: eigenvector size mismatch");
    EigenfunctionField field;
    field.grid = grid;
    field.eigenvalue = eigenvalue;
    const Mat nodes = grid.node_matrix();
    const Mat Z = lift_batch(model.dictionary, nodes).values;  // N x nodes
    field.values = Z.transpose().cast<Complex>() * eigvec;
    if (!field.values.allFinite())
        throw NumericalError("eigenfunction_field: non-finite field value");
    return field;
}

Partition extract_partition(const std::vector<EigenfunctionField>& fields, double level) {
    if (fields.empty()) throw ValidationError("extract_partition: no fields");
    if (!(level > 0.0 && level < 1.0))
        throw ValidationError("extract_partition: level must be in (0, 1)");
    const Index nodes = fields.front().values.size();
    for (const auto& f : fields)
        if (f.values.size() != nodes)
            throw ValidationError("extract_partition: fields on different grids");

    const Index nf = static_cast<Index>(fields.size());
    Mat weight(nf, nodes);  // normalized |phi|
    Vec maxabs(nf);
    for (Index i = 0; i < nf; ++i) {
        const Vec a = fields[i].values.cwiseAbs();
        maxabs[i] = a.maxCoeff();
        if (maxabs[i] > 0.0)
            weight.row(i) = (a / maxabs[i]).transpose();
        else
            weight.row(i).setZero();
    }

    std::vector<int> raw(nodes, -1);
    std::vector<long> hits(nf, 0);
    for (Index j = 0; j < nodes; ++j) {
        Index best = 0;
        double best_w = -1.0;
        for (Index i = 0; i < nf; ++i) {
            if (weight(i, j) > best_w) {  // strict: ties keep the lowest index
                best_w = weight(i, j);
                best = i;
            }
        }
        if (maxabs[best] > 0.0 && best_w >= level) {
            raw[j] = static_cast<int>(best);
            ++hits[best];
        }
    }

    Partition part;
    part.grid = fields.front().grid;
    std::vector<int> label_of_field(nf, 0);
    for (Index i = 0; i < nf; ++i) {
        if (hits[i] > 0) {
            label_of_field[i] = ++part.v;
            part.field_of_label.push_back(i);
        }
    }
    part.labels.resize(nodes, 0);
    for (Index j = 0; j < nodes; ++j)
        if (raw[j] >= 0) part.labels[j] = label_of_field[raw[j]];

    const auto grid_nodes = part.grid.nodes();
    part.representative_peaks.resize(part.v);
    std::vector<double> peak_val(part.v, -1.0);
    for (Index j = 0; j < nodes; ++j) {
        const int lab = part.labels[j];
        if (lab == 0) continue;
        const double a = std::abs(fields[part.field_of_label[lab - 1]].values[j]);
        if (a > peak_val[lab - 1]) {
            peak_val[lab - 1] = a;
            part.representative_peaks[lab - 1] = grid_nodes[j];
        }
    }
    return part;
}

namespace {

// Clusters of numerically equal eigenvalues, for the defectiveness check.
std::vector<std::vector<Index>> eigenvalue_clusters(const CVec& vals, double tol) {
    const Index n = vals.size();
    std::vector<std::vector<Index>> clusters;
    std::vector<bool> used(n, false);
    for (Index i = 0; i < n; ++i) {
        if (used[i]) continue;
        std::vector<Index> cluster{i};
        used[i] = true;
        for (std::size_t c = 0; c < cluster.size(); ++c) {
            for (Index j = 0; j < n; ++j) {
                if (!used[j] && std::abs(vals[cluster[c]] - vals[j]) <= tol) {
                    used[j] = true;
                    cluster.push_back(j);
                }
            }
        }
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

Index numerical_rank(const CMat& A, double rank_tol) {
    Eigen::JacobiSVD<CMat> svd(A);
    const Vec& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv[i] > rank_tol * sv[0]) ++rank;
    return rank;
}

}  // namespace

BlockDiagonalization block_diagonalize(const Mat& K, const SpectralDecomposition& spec,
                                       double rank_tol,
                                       const std::optional<std::vector<int>>& grouping) {
    const Index n = K.rows();
    if (spec.eigenvalues.size() != n)
        throw ValidationError("block_diagonalize: decomposition does not match K");

    // Lemma-2 precondition: within each eigenvalue cluster the eigenvectors
    // must be linearly independent (algebraic multiplicity == numerical rank).
    const double scale = std::max(1.0, spec.eigenvalues.cwiseAbs().maxCoeff());
    const auto clusters = eigenvalue_clusters(spec.eigenvalues, rank_tol * scale);
    for (const auto& cluster : clusters) {
        if (cluster.size() < 2) continue;
        CMat V(n, static_cast<Index>(cluster.size()));
        for (Index i = 0; i < V.cols(); ++i) V.col(i) = spec.eigenvectors.col(cluster[i]);
        const Index rank = numerical_rank(V, rank_tol);
        if (rank < static_cast<Index>(cluster.size())) {
            std::ostringstream msg;
            msg << "block_diagonalize: defective eigenvalue cluster near "
                << spec.eigenvalues[cluster[0]].real();
            if (spec.eigenvalues[cluster[0]].imag() != 0.0)
                msg << (spec.eigenvalues[cluster[0]].imag() >= 0 ? "+" : "")
                    << spec.eigenvalues[cluster[0]].imag() << "i";
            msg << " (algebraic " << cluster.size() << " > geometric " << rank << ")";
            throw NumericalError(msg.str());
        }
    }

    std::vector<int> groups;
    if (grouping) {
        if (static_cast<Index>(grouping->size()) != n)
            throw ValidationError("block_diagonalize: grouping size mismatch");
        groups = *grouping;
    } else {
        groups.assign(n, 1);
        for (Index i : spec.unit_cluster) groups[i] = 0;
        if (spec.unit_cluster.empty() || static_cast<Index>(spec.unit_cluster.size()) == n)
            groups.assign(n, 0);
    }

    // stable order: by group, preserving the decomposition order inside each
    std::vector<int> distinct;
    for (int g : groups)
        if (std::find(distinct.begin(), distinct.end(), g) == distinct.end())
            distinct.push_back(g);
    std::sort(distinct.begin(), distinct.end());

    BlockDiagonalization out;
    out.group_of_eigenvalue = groups;
    out.transform.resize(n, n);
    Index col = 0;
    std::vector<std::pair<Index, Index>> spans;  // (offset, size) per block
    for (int g : distinct) {
        const Index start = col;
        for (Index i = 0; i < n; ++i)
            if (groups[i] == g) out.transform.col(col++) = spec.eigenvectors.col(i);
        spans.emplace_back(start, col - start);
    }

    const Eigen::PartialPivLU<CMat> lu(out.transform);
    const CMat M = lu.solve(K.cast<Complex>() * out.transform);

    double off2 = 0.0;
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < n; ++c) {
            bool inside = false;
            for (const auto& [off, size] : spans)
                if (r >= off && r < off + size && c >= off && c < off + size) inside = true;
            if (!inside) off2 += std::norm(M(r, c));
        }
    }
    out.off_block_mass = std::sqrt(off2);
    const double bound = 1e-6 * K.norm();
    if (out.off_block_mass > bound) {
        std::ostringstream msg;
        msg << "block_diagonalize: off-block mass " << out.off_block_mass
            << " exceeds " << bound << " (ill-conditioned eigenbasis)";
        throw NumericalError(msg.str());
    }

    for (const auto& [off, size] : spans) out.blocks.push_back(M.block(off, off, size, size));
    return out;
}

std::vector<CVec> localized_unit_basis(const KoopmanModel& model,
                                       const SpectralDecomposition& spec, const GridBox& grid) {
    const auto& cluster = spec.unit_cluster;
    std::vector<CVec> basis;
    basis.reserve(cluster.size());

    std::vector<bool> handled(cluster.size(), false);
    Mat nodes;  // lifted lazily, only when a pair needs rotating
    Mat Z;

    auto canonical = [](Vec w) {
        w /= w.norm();
        Index imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        if (w[imax] < 0.0) w = -w;
        return w;
    };

    for (std::size_t i = 0; i < cluster.size(); ++i) {
        if (handled[i]) continue;
        const Complex lambda = spec.eigenvalues[cluster[i]];
        std::size_t partner = i;
        if (lambda.imag() != 0.0) {
            for (std::size_t j = i + 1; j < cluster.size(); ++j) {
                if (!handled[j] &&
                    std::abs(spec.eigenvalues[cluster[j]] - std::conj(lambda)) <=
                        1e-12 * std::max(1.0, std::abs(lambda))) {
                    partner = j;
                    break;
                }
            }
        }
        if (partner == i) {
            basis.push_back(spec.eigenvectors.col(cluster[i]));
            handled[i] = true;
            continue;
        }

        if (Z.size() == 0) Z = lift_batch(model.dictionary, grid.node_matrix()).values;
        const Vec a = spec.eigenvectors.col(cluster[i]).real();
        const Vec b = spec.eigenvectors.col(cluster[i]).imag();
        const Vec u = Z.transpose() * a;
        const Vec t = Z.transpose() * b;

        // minimize sum_j (u t cos2w + (t^2-u^2)/2 sin2w)^2 over the rotation
        // angle w: smallest-eigenvalue direction of the 2x2 moment matrix
        const Vec alpha = u.cwiseProduct(t);
        const Vec beta = 0.5 * (t.cwiseProduct(t) - u.cwiseProduct(u));
        const double A = alpha.squaredNorm();
        const double B = alpha.dot(beta);
        const double C = beta.squaredNorm();
        double c2 = 1.0, s2 = 0.0;
        if (std::abs(B) > 1e-300) {
            const double lam_min = 0.5 * (A + C) - 0.5 * std::hypot(A - C, 2.0 * B);
            c2 = lam_min - C;
            s2 = B;
            const double norm = std::hypot(c2, s2);
            c2 /= norm;
            s2 /= norm;
        } else if (A > C) {
            c2 = 0.0;
            s2 = 1.0;
        }
        const double theta = 0.5 * std::atan2(s2, c2);
        const Vec w1 = std::cos(theta) * a + std::sin(theta) * b;
        const Vec w2 = -std::sin(theta) * a + std::cos(theta) * b;
        basis.push_back(canonical(w1).cast<Complex>());
        basis.push_back(canonical(w2).cast<Complex>());
        handled[i] = true;
        handled[partner] = true;
    }
    return basis;
}

std::vector<int> partition_grouping(const KoopmanModel& model,
                                    const SpectralDecomposition& spec,
                                    const Partition& partition) {
    const Index n = spec.eigenvalues.size();
    std::vector<int> groups(n, 0);
    for (Index i = 0; i < n; ++i) {
        const EigenfunctionField f =
            eigenfunction_field(model, spec.eigenvectors.col(i), partition.grid,
                                spec.eigenvalues[i]);
        Index peak = 0;
        double best = -1.0;
        for (Index j = 0; j < f.values.size(); ++j) {
            const double a = std::abs(f.values[j]);
            if (a > best) {
                best = a;
                peak = j;
            }
        }
        groups[i] = partition.labels[peak];
    }
    return groups;
}

}  // namespace koopman
