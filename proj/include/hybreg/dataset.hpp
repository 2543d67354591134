#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace hybreg {

/// Tabular regression dataset: feature matrix plus target vector.
/// Rows are samples; the default schema is the solar-collector layout
/// (s1_temp, s2_temp, flow_rate, solar_radiation -> s4_temp).
struct Dataset {
    Eigen::MatrixXd features;               // N x F
    Eigen::VectorXd target;                 // N
    std::vector<std::string> column_names;  // F feature names + target name

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index feature_count() const { return features.cols(); }
};

std::vector<std::string> default_schema();

enum class RowPolicy { Error, Drop };

/// Per-feature min/max fitted on the training partition.
struct ScalerParams {
    Eigen::VectorXd mins;
    Eigen::VectorXd maxs;
    std::vector<bool> degenerate;  // max == min

    Eigen::Index size() const { return mins.size(); }
};

struct SplitSpec {
    double validation_fraction = 0.2;
    std::uint64_t seed = 42;
};

struct SplitResult {
    Dataset train;
    Dataset validation;
};

struct SynthResult {
    Dataset data;
    std::vector<int> regimes;  // generating regime per row, for test oracles
};

/// Reads the named columns from a headered CSV file (order-insensitive,
/// extra columns ignored). Unparseable or non-finite cells follow `policy`.
Eigen::MatrixXd read_csv_columns(const std::string& path,
                                 const std::vector<std::string>& columns,
                                 RowPolicy policy = RowPolicy::Error,
                                 std::size_t* dropped_out = nullptr);

Dataset ingest_csv(const std::string& path,
                   const std::vector<std::string>& schema = default_schema(),
                   RowPolicy policy = RowPolicy::Error,
                   std::size_t* dropped_out = nullptr);

std::string to_csv(const Dataset& data);

ScalerParams fit_scaler(const Eigen::MatrixXd& train_features);
ScalerParams fit_scaler(const Dataset& train);

Eigen::MatrixXd apply_scaler(const ScalerParams& params, const Eigen::MatrixXd& features);
Dataset apply_scaler(const ScalerParams& params, const Dataset& data);
Eigen::VectorXd apply_scaler_row(const ScalerParams& params, const Eigen::VectorXd& row);
Eigen::MatrixXd invert_scaler(const ScalerParams& params, const Eigen::MatrixXd& scaled);

SplitResult split(const Dataset& data, const SplitSpec& spec);

/// Piecewise-regime synthetic generator standing in for the (unpublished)
/// plant data: four latent operating regimes with well-separated input
/// levels and a distinct smooth target map per regime.
SynthResult synthesize(std::size_t n, std::uint64_t seed);

}  // namespace hybreg
