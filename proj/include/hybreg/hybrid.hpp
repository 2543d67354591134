#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybreg/clustering.hpp"
#include "hybreg/dataset.hpp"
#include "hybreg/metrics.hpp"
#include "hybreg/mlp.hpp"

namespace hybreg {

/// local_models trains one MLP per cluster (the default); label_feature
/// appends the normalized cluster id as an extra input of one shared MLP.
enum class HybridMode { LocalModels, LabelFeature };

std::string hybrid_mode_name(HybridMode m);
HybridMode parse_hybrid_mode(const std::string& name);

struct TargetScaler {
    double min = 0.0;
    double max = 1.0;

    double scale(double y) const { return max > min ? (y - min) / (max - min) : 0.0; }
    double descale(double s) const { return max > min ? s * (max - min) + min : min; }
};

/// Clustering stage plus one local MLP per cluster, everything a prediction
/// needs end to end: feature scaler in, target de-scaler out.
struct HybridModel {
    ScalerParams scaler;
    ClusterModel cluster_model;
    std::vector<MlpModel> locals;  // one per cluster, or one shared in label_feature mode
    TargetScaler target_scaler;
    HybridMode mode = HybridMode::LocalModels;
    std::uint64_t seed = 0;

    int k() const { return cluster_model.k; }
};

struct ClusterErrorRow {
    int cluster = 0;
    int size = 0;  // validation samples routed here
    RegressionMetrics metrics;
};

struct ErrorReport {
    std::vector<ClusterErrorRow> per_cluster;  // always k rows, size 0 allowed
    RegressionMetrics weighted_average;        // over clusters with size > 0
    int total = 0;
};

struct TrainedHybrid {
    HybridModel model;
    std::vector<CandidateScore> grid_winners;  // per cluster (single row in label_feature mode)
    ClusterAssignment train_assignment;
};

TrainedHybrid train_hybrid(const Dataset& train, Kind kind, int k, const GridSpec& grid,
                           std::uint64_t seed, HybridMode mode = HybridMode::LocalModels,
                           Linkage linkage = Linkage::Ward);

/// Raw physical-unit features in, physical-unit s4 prediction out.
double predict(const HybridModel& model, const Eigen::VectorXd& x);
int predict_cluster(const HybridModel& model, const Eigen::VectorXd& x);

ErrorReport error_report(const HybridModel& model, const Dataset& validation);

/// Size-weighted combination of per-cluster rows (clusters with zero
/// validation samples excluded). Exposed for the report invariant tests.
RegressionMetrics weighted_metrics(const std::vector<ClusterErrorRow>& rows);

struct KindOutcome {
    Kind kind = Kind::KMeans;
    bool ok = false;
    std::string error;
    int k_used = 0;
    ErrorReport report;
    std::vector<CandidateScore> grid_winners;
};

struct CompareResult {
    std::vector<KindOutcome> outcomes;  // in requested kind order
};

/// Trains one hybrid per clustering kind on the same training partition and
/// evaluates all of them against the same validation partition. `fixed_k`
/// forces a shared cluster count; otherwise each kind uses its best
/// silhouette k from a scan over [k_lo, k_hi]. Per-kind failures are
/// annotated, not fatal.
CompareResult compare_methods(const Dataset& train, const Dataset& validation,
                              const std::vector<Kind>& kinds, const GridSpec& grid,
                              std::uint64_t seed, std::optional<int> fixed_k,
                              int k_lo = 2, int k_hi = 6,
                              HybridMode mode = HybridMode::LocalModels);

}  // namespace hybreg
