#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace hybreg {

enum class Activation { Tanh, Relu, Identity };  // Identity is a test hook only
enum class Solver { Lbfgs, Sgd, Adam };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);
std::string solver_name(Solver s);
Solver parse_solver(const std::string& name);

/// Single-hidden-layer perceptron regressor: y = w2 * act(w1 * x + b1) + b2.
struct MlpModel {
    Eigen::MatrixXd w1;     // H x F
    Eigen::VectorXd b1;     // H
    Eigen::RowVectorXd w2;  // 1 x H
    double b2 = 0.0;
    Activation activation = Activation::Tanh;

    struct Provenance {
        Solver solver = Solver::Lbfgs;
        int neurons = 0;
        double cv_mse = 0.0;
        std::uint64_t seed = 0;
    } provenance;

    int hidden_units() const { return static_cast<int>(w1.rows()); }
    int inputs() const { return static_cast<int>(w1.cols()); }
};

struct TrainLimits {
    int max_iterations = 500;  // L-BFGS iterations or SGD/Adam epochs
    double gradient_tol = 1e-6;
    double loss_tol = 1e-8;
    int batch_size = 32;
    double sgd_learning_rate = 1e-2;
    double sgd_momentum = 0.9;
    double adam_learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

struct TrainReport {
    double final_train_mse = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> loss_history;
};

struct TrainOutcome {
    MlpModel model;
    TrainReport report;
};

double forward(const MlpModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& X);

/// Flat parameter layout: w1 row-major, b1, w2, b2.
Eigen::Index parameter_count(int hidden, int inputs);
Eigen::VectorXd pack_parameters(const MlpModel& model);
void unpack_parameters(const Eigen::VectorXd& theta, MlpModel& model);

/// Batch MSE (1/m) sum (y - yhat)^2 and its exact gradient with respect to
/// every parameter. relu's subgradient at 0 is 0.
double mse_and_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, Eigen::VectorXd& grad);
double mse_loss(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

TrainOutcome train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int neurons,
                   Activation activation, Solver solver, std::uint64_t seed,
                   const TrainLimits& limits = {});

struct GridSpec {
    int neurons_min = 12;
    int neurons_max = 30;
    std::vector<Activation> activations = {Activation::Tanh, Activation::Relu};
    std::vector<Solver> solvers = {Solver::Lbfgs, Solver::Sgd, Solver::Adam};
    int folds = 5;
    std::uint64_t seed = 42;
    TrainLimits limits;
};

struct CandidateScore {
    int neurons = 0;
    Activation activation = Activation::Tanh;
    Solver solver = Solver::Lbfgs;
    double cv_mse = 0.0;
    std::vector<double> fold_mse;
};

struct GridSearchResult {
    CandidateScore best;
    std::vector<CandidateScore> table;   // deterministic candidate order
    std::vector<int> fold_of_sample;     // shared seeded folding
};

/// Exhaustive (neurons, activation, solver) search scored by k-fold CV mean
/// validation MSE. Ties break toward fewer neurons, then tanh before relu,
/// then lbfgs < sgd < adam.
GridSearchResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const GridSpec& grid);

}  // namespace hybreg
