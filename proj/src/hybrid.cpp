#include "hybreg/hybrid.hpp"

#include <cmath>
#include <stdexcept>

#include "hybreg/cluster_quality.hpp"
#include "hybreg/errors.hpp"

namespace hybreg {

std::string hybrid_mode_name(HybridMode m) {
    return m == HybridMode::LocalModels ? "local_models" : "label_feature";
}

HybridMode parse_hybrid_mode(const std::string& name) {
    if (name == "local_models") return HybridMode::LocalModels;
    if (name == "label_feature") return HybridMode::LabelFeature;
    throw std::invalid_argument("unknown hybrid mode: " + name);
}

namespace {

ClusterFit fit_clustering(const Eigen::MatrixXd& scaled, Kind kind, int k,
                          std::uint64_t seed, Linkage linkage) {
    switch (kind) {
        case Kind::KMeans: return kmeans(scaled, k, seed);
        case Kind::GaussianMixture: return gaussian_mixture(scaled, k, seed);
        case Kind::Agglomerative: return agglomerative(scaled, k, linkage);
        case Kind::Spectral: return spectral(scaled, k, seed);
    }
    throw std::invalid_argument("fit_clustering: bad kind");
}

double label_feature_value(int label, int k) {
    return k > 1 ? static_cast<double>(label) / (k - 1) : 0.0;
}

}  // namespace

TrainedHybrid train_hybrid(const Dataset& train, Kind kind, int k, const GridSpec& grid,
                           std::uint64_t seed, HybridMode mode, Linkage linkage) {
    if (train.size() < 1) throw std::invalid_argument("train_hybrid: empty training data");

    TrainedHybrid out;
    HybridModel& model = out.model;
    model.mode = mode;
    model.seed = seed;
    model.scaler = fit_scaler(train.features);
    model.target_scaler.min = train.target.minCoeff();
    model.target_scaler.max = train.target.maxCoeff();

    const Eigen::MatrixXd scaled = apply_scaler(model.scaler, train.features);
    Eigen::VectorXd scaled_target(train.size());
    for (Eigen::Index i = 0; i < train.size(); ++i)
        scaled_target(i) = model.target_scaler.scale(train.target(i));

    ClusterFit fit = fit_clustering(scaled, kind, k, seed, linkage);
    model.cluster_model = std::move(fit.model);
    out.train_assignment = std::move(fit.assignment);

    for (int j = 0; j < k; ++j) {
        const int size = out.train_assignment.sizes[static_cast<std::size_t>(j)];
        if (size < grid.folds)
            throw DataError("cluster " + std::to_string(j) + " has " + std::to_string(size) +
                            " samples, fewer than the " + std::to_string(grid.folds) +
                            " cross-validation folds");
    }

    if (mode == HybridMode::LocalModels) {
        for (int j = 0; j < k; ++j) {
            std::vector<Eigen::Index> members;
            for (Eigen::Index i = 0; i < train.size(); ++i)
                if (out.train_assignment.labels[static_cast<std::size_t>(i)] == j)
                    members.push_back(i);
            Eigen::MatrixXd xj(static_cast<Eigen::Index>(members.size()), scaled.cols());
            Eigen::VectorXd yj(static_cast<Eigen::Index>(members.size()));
            for (std::size_t i = 0; i < members.size(); ++i) {
                xj.row(static_cast<Eigen::Index>(i)) = scaled.row(members[i]);
                yj(static_cast<Eigen::Index>(i)) = scaled_target(members[i]);
            }

            // cluster j draws from grid.seed + j so a k = 1 hybrid matches a
            // directly trained global model seeded with grid.seed
            GridSpec local_grid = grid;
            local_grid.seed = grid.seed + static_cast<std::uint64_t>(j);
            const GridSearchResult search = grid_search(xj, yj, local_grid);
            TrainOutcome trained = train(xj, yj, search.best.neurons, search.best.activation,
                                         search.best.solver, local_grid.seed, grid.limits);
            trained.model.provenance.cv_mse = search.best.cv_mse;
            model.locals.push_back(std::move(trained.model));
            out.grid_winners.push_back(search.best);
        }
    } else {
        Eigen::MatrixXd augmented(train.size(), scaled.cols() + 1);
        augmented.leftCols(scaled.cols()) = scaled;
        for (Eigen::Index i = 0; i < train.size(); ++i)
            augmented(i, scaled.cols()) = label_feature_value(
                out.train_assignment.labels[static_cast<std::size_t>(i)], k);
        const GridSearchResult search = grid_search(augmented, scaled_target, grid);
        TrainOutcome trained = train(augmented, scaled_target, search.best.neurons,
                                     search.best.activation, search.best.solver, grid.seed,
                                     grid.limits);
        trained.model.provenance.cv_mse = search.best.cv_mse;
        model.locals.push_back(std::move(trained.model));
        out.grid_winners.push_back(search.best);
    }
    return out;
}

int predict_cluster(const HybridModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd scaled = apply_scaler_row(model.scaler, x);
    return route(model.cluster_model, scaled);
}

double predict(const HybridModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd scaled = apply_scaler_row(model.scaler, x);
    const int cluster = route(model.cluster_model, scaled);
    double scaled_prediction;
    if (model.mode == HybridMode::LocalModels) {
        scaled_prediction = forward(model.locals[static_cast<std::size_t>(cluster)], scaled);
    } else {
        Eigen::VectorXd augmented(scaled.size() + 1);
        augmented.head(scaled.size()) = scaled;
        augmented(scaled.size()) = label_feature_value(cluster, model.k());
        scaled_prediction = forward(model.locals[0], augmented);
    }
    return model.target_scaler.descale(scaled_prediction);
}

RegressionMetrics weighted_metrics(const std::vector<ClusterErrorRow>& rows) {
    double total = 0.0;
    RegressionMetrics w;
    w.mse = w.mae = w.lmls = w.mape = w.mase = w.smape = w.nmse = 0.0;
    for (const ClusterErrorRow& row : rows) {
        if (row.size == 0) continue;
        const auto weight = static_cast<double>(row.size);
        total += weight;
        w.mse += weight * row.metrics.mse;
        w.mae += weight * row.metrics.mae;
        w.lmls += weight * row.metrics.lmls;
        w.mape += weight * row.metrics.mape;
        w.mase += weight * row.metrics.mase;
        w.smape += weight * row.metrics.smape;
        w.nmse += weight * row.metrics.nmse;
        w.count += row.metrics.count;
        w.mape_skipped += row.metrics.mape_skipped;
        w.smape_skipped += row.metrics.smape_skipped;
        w.mase_defined = w.mase_defined && row.metrics.mase_defined;
        w.nmse_defined = w.nmse_defined && row.metrics.nmse_defined;
    }
    if (total <= 0.0) throw std::invalid_argument("weighted_metrics: no populated clusters");
    w.mse /= total;
    w.mae /= total;
    w.lmls /= total;
    w.mape /= total;
    w.mase /= total;
    w.smape /= total;
    w.nmse /= total;
    return w;
}

ErrorReport error_report(const HybridModel& model, const Dataset& validation) {
    if (validation.size() < 1) throw std::invalid_argument("error_report: empty validation data");

    const int k = model.k();
    std::vector<std::vector<double>> observed(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> predicted(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < validation.size(); ++i) {
        const Eigen::VectorXd x = validation.features.row(i);
        const int cluster = predict_cluster(model, x);
        observed[static_cast<std::size_t>(cluster)].push_back(validation.target(i));
        predicted[static_cast<std::size_t>(cluster)].push_back(predict(model, x));
    }

    ErrorReport report;
    report.total = static_cast<int>(validation.size());
    for (int j = 0; j < k; ++j) {
        ClusterErrorRow row;
        row.cluster = j;
        row.size = static_cast<int>(observed[static_cast<std::size_t>(j)].size());
        if (row.size > 0) {
            const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
                observed[static_cast<std::size_t>(j)].data(), row.size);
            const Eigen::VectorXd yhat = Eigen::Map<const Eigen::VectorXd>(
                predicted[static_cast<std::size_t>(j)].data(), row.size);
            row.metrics = compute_metrics(y, yhat);
        }
        report.per_cluster.push_back(std::move(row));
    }
    report.weighted_average = weighted_metrics(report.per_cluster);
    return report;
}

CompareResult compare_methods(const Dataset& train, const Dataset& validation,
                              const std::vector<Kind>& kinds, const GridSpec& grid,
                              std::uint64_t seed, std::optional<int> fixed_k, int k_lo,
                              int k_hi, HybridMode mode) {
    CompareResult result;
    for (Kind kind : kinds) {
        KindOutcome outcome;
        outcome.kind = kind;
        try {
            int k;
            if (fixed_k) {
                k = *fixed_k;
            } else {
                const ScalerParams scaler = fit_scaler(train.features);
                const Eigen::MatrixXd scaled = apply_scaler(scaler, train.features);
                k = scan_k(scaled, kind, k_lo, k_hi, seed).best_k;
            }
            TrainedHybrid trained = train_hybrid(train, kind, k, grid, seed, mode);
            outcome.k_used = k;
            outcome.report = error_report(trained.model, validation);
            outcome.grid_winners = std::move(trained.grid_winners);
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
        result.outcomes.push_back(std::move(outcome));
    }
    return result;
}

}  // namespace hybreg
