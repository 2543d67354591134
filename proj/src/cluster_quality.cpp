#include "hybreg/cluster_quality.hpp"

#include <cmath>
#include <limits>

#include "hybreg/errors.hpp"

namespace hybreg {

SilhouetteResult silhouette(const Eigen::MatrixXd& data, const ClusterAssignment& assignment) {
    const Eigen::Index n = data.rows();
    const int k = assignment.k;
    if (k < 2) throw std::invalid_argument("silhouette: need at least 2 clusters");

    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (data.row(i) - data.row(j)).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    SilhouetteResult result;
    result.per_sample.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = assignment.labels[static_cast<std::size_t>(i)];
        if (assignment.sizes[static_cast<std::size_t>(own)] == 1) {
            result.per_sample(i) = 0.0;
            continue;
        }
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            sum(assignment.labels[static_cast<std::size_t>(j)]) += dist(i, j);
        }
        const double x = sum(own) / (assignment.sizes[static_cast<std::size_t>(own)] - 1);
        double y = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own) continue;
            y = std::min(y, sum(c) / assignment.sizes[static_cast<std::size_t>(c)]);
        }
        const double denom = std::max(x, y);
        result.per_sample(i) = denom > 0.0 ? (y - x) / denom : 0.0;
    }
    result.mean = result.per_sample.mean();
    return result;
}

double calinski_harabasz(const Eigen::MatrixXd& data, const ClusterAssignment& assignment) {
    const Eigen::Index n = data.rows();
    const int k = assignment.k;
    if (k < 2) throw std::invalid_argument("calinski_harabasz: need at least 2 clusters");

    const Eigen::RowVectorXd global = data.colwise().mean();
    Eigen::MatrixXd barycenters = Eigen::MatrixXd::Zero(k, data.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        barycenters.row(assignment.labels[static_cast<std::size_t>(i)]) += data.row(i);
    for (int c = 0; c < k; ++c) barycenters.row(c) /= assignment.sizes[static_cast<std::size_t>(c)];

    double bgss = 0.0;
    for (int c = 0; c < k; ++c)
        bgss += assignment.sizes[static_cast<std::size_t>(c)] *
                (barycenters.row(c) - global).squaredNorm();

    double wgss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        wgss += (data.row(i) -
                 barycenters.row(assignment.labels[static_cast<std::size_t>(i)]))
                    .squaredNorm();

    if (wgss <= 0.0) {
        if (bgss <= 0.0)
            throw NumericError("calinski_harabasz: all points identical");
        return std::numeric_limits<double>::infinity();
    }
    return (static_cast<double>(n - k) / static_cast<double>(k - 1)) * (bgss / wgss);
}

double davies_bouldin(const Eigen::MatrixXd& data, const ClusterAssignment& assignment) {
    const Eigen::Index n = data.rows();
    const int k = assignment.k;
    if (k < 2) throw std::invalid_argument("davies_bouldin: need at least 2 clusters");

    Eigen::MatrixXd barycenters = Eigen::MatrixXd::Zero(k, data.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        barycenters.row(assignment.labels[static_cast<std::size_t>(i)]) += data.row(i);
    for (int c = 0; c < k; ++c) barycenters.row(c) /= assignment.sizes[static_cast<std::size_t>(c)];

    // delta_j: mean distance of members to their barycenter
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = assignment.labels[static_cast<std::size_t>(i)];
        delta(c) += (data.row(i) - barycenters.row(c)).norm();
    }
    for (int c = 0; c < k; ++c) delta(c) /= assignment.sizes[static_cast<std::size_t>(c)];

    double db = 0.0;
    for (int j = 0; j < k; ++j) {
        double m = 0.0;
        for (int j2 = 0; j2 < k; ++j2) {
            if (j2 == j) continue;
            const double gap = (barycenters.row(j) - barycenters.row(j2)).norm();
            if (gap <= 0.0)
                throw NumericError("davies_bouldin: coincident barycenters");
            m = std::max(m, (delta(j) + delta(j2)) / gap);
        }
        db += m;
    }
    return db / k;
}

QualityReport quality_report(const Eigen::MatrixXd& data, const ClusterAssignment& assignment) {
    QualityReport report;
    report.k = assignment.k;
    const SilhouetteResult s = silhouette(data, assignment);
    report.silhouette = s.mean;
    report.per_sample_silhouette = s.per_sample;
    report.calinski_harabasz = calinski_harabasz(data, assignment);
    report.davies_bouldin = davies_bouldin(data, assignment);
    return report;
}

const ScanRow& ScanResult::row_for(int k) const {
    for (const ScanRow& r : rows)
        if (r.k == k) return r;
    throw std::invalid_argument("scan has no row for k=" + std::to_string(k));
}

ScanResult scan_k(const Eigen::MatrixXd& data, Kind kind, int k_lo, int k_hi,
                  std::uint64_t seed, Linkage linkage) {
    const Eigen::Index n = data.rows();
    if (k_lo < 2 || k_hi >= n || k_lo > k_hi)
        throw std::invalid_argument("scan_k: range must lie within [2, N-1]");

    ScanResult result;
    result.kind = kind;
    for (int k = k_lo; k <= k_hi; ++k) {
        ScanRow row;
        row.k = k;
        try {
            ClusterFit fit;
            switch (kind) {
                case Kind::KMeans: fit = kmeans(data, k, seed + static_cast<std::uint64_t>(k)); break;
                case Kind::GaussianMixture:
                    fit = gaussian_mixture(data, k, seed + static_cast<std::uint64_t>(k));
                    break;
                case Kind::Agglomerative: fit = agglomerative(data, k, linkage); break;
                case Kind::Spectral:
                    fit = spectral(data, k, seed + static_cast<std::uint64_t>(k));
                    break;
            }
            row.report = quality_report(data, fit.assignment);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }

    bool any = false;
    for (const ScanRow& row : result.rows) {
        if (!row.ok) continue;
        if (!any) {
            result.best_by_silhouette = result.best_by_calinski_harabasz =
                result.best_by_davies_bouldin = row.k;
            any = true;
            continue;
        }
        const QualityReport& r = row.report;
        if (r.silhouette > result.row_for(result.best_by_silhouette).report.silhouette)
            result.best_by_silhouette = row.k;
        if (r.calinski_harabasz >
            result.row_for(result.best_by_calinski_harabasz).report.calinski_harabasz)
            result.best_by_calinski_harabasz = row.k;
        if (r.davies_bouldin < result.row_for(result.best_by_davies_bouldin).report.davies_bouldin)
            result.best_by_davies_bouldin = row.k;
    }
    if (!any) throw NumericError("scan_k: every k in the range failed");

    // best k by silhouette, Calinski-Harabasz breaking ties
    result.best_k = result.best_by_silhouette;
    for (const ScanRow& row : result.rows) {
        if (!row.ok || row.k == result.best_k) continue;
        const QualityReport& best = result.row_for(result.best_k).report;
        if (row.report.silhouette == best.silhouette &&
            row.report.calinski_harabasz > best.calinski_harabasz)
            result.best_k = row.k;
    }
    return result;
}

}  // namespace hybreg
