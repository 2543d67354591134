#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hybreg/clustering.hpp"

namespace hybreg {

struct QualityReport {
    int k = 0;
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
    double davies_bouldin = 0.0;
    Eigen::VectorXd per_sample_silhouette;
};

struct SilhouetteResult {
    double mean = 0.0;
    Eigen::VectorXd per_sample;
};

/// Mean silhouette coefficient s(j) = (y - x) / max(x, y). Singleton
/// clusters score 0.
SilhouetteResult silhouette(const Eigen::MatrixXd& data, const ClusterAssignment& assignment);

/// (N-K)/(K-1) * BGSS/WGSS. Returns +inf when WGSS is zero but the
/// barycenters are spread, so argmax scans stay well defined.
double calinski_harabasz(const Eigen::MatrixXd& data, const ClusterAssignment& assignment);

double davies_bouldin(const Eigen::MatrixXd& data, const ClusterAssignment& assignment);

QualityReport quality_report(const Eigen::MatrixXd& data, const ClusterAssignment& assignment);

struct ScanRow {
    int k = 0;
    bool ok = false;
    std::string error;
    QualityReport report;
};

struct ScanResult {
    Kind kind = Kind::KMeans;
    std::vector<ScanRow> rows;
    int best_by_silhouette = 0;
    int best_by_calinski_harabasz = 0;
    int best_by_davies_bouldin = 0;
    int best_k = 0;  // silhouette argmax, Calinski-Harabasz as tie-breaker

    const ScanRow& row_for(int k) const;
};

/// Fits `kind` for every k in [k_lo, k_hi] (per-k seed offset by k) and
/// scores all three indices. Per-k fit failures are recorded, not fatal.
ScanResult scan_k(const Eigen::MatrixXd& data, Kind kind, int k_lo, int k_hi,
                  std::uint64_t seed, Linkage linkage = Linkage::Ward);

}  // namespace hybreg
