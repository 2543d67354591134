#pragma once

#include <Eigen/Dense>

namespace hybreg {

/// Regression error measures over an (observed, predicted) pair of vectors.
/// MAPE is kept as a fraction (1.0 means a 100% mean absolute error).
/// SMAPE uses the plain Y + Yhat denominator; rows where it is <= 1e-9 are
/// skipped and counted, as are MAPE rows with Y ~ 0. MASE is scaled by the
/// mean absolute deviation of the observed values around their own mean and
/// NMSE divides by mean(Yhat) * mean(Y).
struct RegressionMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double lmls = 0.0;
    double mape = 0.0;
    double mase = 0.0;
    double smape = 0.0;
    double nmse = 0.0;
    int count = 0;
    int mape_skipped = 0;
    int smape_skipped = 0;
    bool mase_defined = true;
    bool nmse_defined = true;
};

RegressionMetrics compute_metrics(const Eigen::VectorXd& observed,
                                  const Eigen::VectorXd& predicted);

}  // namespace hybreg
