#pragma once

#include <Eigen/Dense>

#include "hybreg/clustering.hpp"

namespace hybreg {

/// Two-dimensional Fisher discriminant projection, fitted with cluster
/// labels as classes. Used for the scatter visualizations.
struct LdaProjection {
    Eigen::MatrixXd basis;        // F x 2 discriminant directions
    Eigen::MatrixXd class_means;  // K x F
    Eigen::RowVectorXd global_mean;
};

LdaProjection fit_lda(const Eigen::MatrixXd& data, const ClusterAssignment& labels);

/// Rows mapped by (x - global_mean) * basis.
Eigen::MatrixXd project(const LdaProjection& p, const Eigen::MatrixXd& data);

}  // namespace hybreg
