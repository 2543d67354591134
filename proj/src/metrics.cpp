#include "hybreg/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hybreg {

namespace {
constexpr double kDenomFloor = 1e-9;
}

RegressionMetrics compute_metrics(const Eigen::VectorXd& observed,
                                  const Eigen::VectorXd& predicted) {
    const Eigen::Index m = observed.size();
    if (m == 0) throw std::invalid_argument("compute_metrics: empty input");
    if (predicted.size() != m)
        throw std::invalid_argument("compute_metrics: size mismatch");

    RegressionMetrics r;
    r.count = static_cast<int>(m);

    double mape_sum = 0.0, smape_sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double err = observed(j) - predicted(j);
        r.mse += err * err;
        r.mae += std::abs(err);
        r.lmls += std::log(1.0 + 0.5 * err * err);

        if (std::abs(observed(j)) > kDenomFloor)
            mape_sum += std::abs(err) / observed(j);
        else
            r.mape_skipped++;

        const double pair_sum = observed(j) + predicted(j);
        if (pair_sum > kDenomFloor)
            smape_sum += std::abs(err) / pair_sum;
        else
            r.smape_skipped++;
    }
    const auto dm = static_cast<double>(m);
    r.mse /= dm;
    r.mae /= dm;
    r.lmls /= dm;
    r.mape = (m - r.mape_skipped) > 0 ? mape_sum / (m - r.mape_skipped)
                                      : std::numeric_limits<double>::quiet_NaN();
    r.smape = (m - r.smape_skipped) > 0 ? 2.0 * smape_sum / (m - r.smape_skipped)
                                        : std::numeric_limits<double>::quiet_NaN();

    const double mean_y = observed.mean();
    const double mean_yhat = predicted.mean();

    const double naive_mae = (observed.array() - mean_y).abs().mean();
    r.mase_defined = naive_mae > kDenomFloor;
    r.mase = r.mase_defined ? r.mae / naive_mae : std::numeric_limits<double>::quiet_NaN();

    const double nmse_denom = mean_yhat * mean_y;
    r.nmse_defined = std::abs(nmse_denom) > kDenomFloor;
    r.nmse = r.nmse_defined ? r.mse / nmse_denom : std::numeric_limits<double>::quiet_NaN();

    return r;
}

}  // namespace hybreg
