#include "hybreg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hybreg/errors.hpp"
#include "hybreg/optim.hpp"
#include "hybreg/rng.hpp"

namespace hybreg {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
    }
    return "?";
}

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation: " + name);
}

std::string solver_name(Solver s) {
    switch (s) {
        case Solver::Lbfgs: return "lbfgs";
        case Solver::Sgd: return "sgd";
        case Solver::Adam: return "adam";
    }
    return "?";
}

Solver parse_solver(const std::string& name) {
    if (name == "lbfgs") return Solver::Lbfgs;
    if (name == "sgd") return Solver::Sgd;
    if (name == "adam") return Solver::Adam;
    throw std::invalid_argument("unknown solver: " + name);
}

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::Tanh: return z.array().tanh();
        case Activation::Relu: return z.cwiseMax(0.0);
        case Activation::Identity: return z;
    }
    return z;
}

Eigen::MatrixXd activate_derivative(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::Tanh: return 1.0 - z.array().tanh().square();
        case Activation::Relu:
            return (z.array() > 0.0).cast<double>();  // subgradient at 0 is 0
        case Activation::Identity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    }
    return z;
}

void check_dims(const MlpModel& model, Eigen::Index features) {
    if (model.w1.cols() != features)
        throw std::invalid_argument("mlp: input dimension mismatch");
    if (!model.w1.allFinite() || !model.b1.allFinite() || !model.w2.allFinite() ||
        !std::isfinite(model.b2))
        throw NumericError("mlp: non-finite parameters");
}

}  // namespace

double forward(const MlpModel& model, const Eigen::VectorXd& x) {
    check_dims(model, x.size());
    const Eigen::VectorXd z = model.w1 * x + model.b1;
    const Eigen::VectorXd a = activate(model.activation, z);
    return model.w2.dot(a) + model.b2;
}

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& X) {
    check_dims(model, X.cols());
    const Eigen::MatrixXd z =
        (X * model.w1.transpose()).rowwise() + model.b1.transpose();
    const Eigen::MatrixXd a = activate(model.activation, z);
    return (a * model.w2.transpose()).array() + model.b2;
}

Eigen::Index parameter_count(int hidden, int inputs) {
    return static_cast<Eigen::Index>(hidden) * inputs + hidden + hidden + 1;
}

Eigen::VectorXd pack_parameters(const MlpModel& model) {
    const int h = model.hidden_units();
    const int f = model.inputs();
    Eigen::VectorXd theta(parameter_count(h, f));
    Eigen::Index pos = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < f; ++j) theta(pos++) = model.w1(i, j);
    theta.segment(pos, h) = model.b1;
    pos += h;
    theta.segment(pos, h) = model.w2.transpose();
    pos += h;
    theta(pos) = model.b2;
    return theta;
}

void unpack_parameters(const Eigen::VectorXd& theta, MlpModel& model) {
    const int h = model.hidden_units();
    const int f = model.inputs();
    Eigen::Index pos = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < f; ++j) model.w1(i, j) = theta(pos++);
    model.b1 = theta.segment(pos, h);
    pos += h;
    model.w2 = theta.segment(pos, h).transpose();
    pos += h;
    model.b2 = theta(pos);
}

double mse_loss(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return (forward_batch(model, X) - y).squaredNorm() / static_cast<double>(X.rows());
}

double mse_and_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, Eigen::VectorXd& grad) {
    if (X.rows() == 0) throw std::invalid_argument("mse_and_gradient: empty batch");
    check_dims(model, X.cols());
    const auto m = static_cast<double>(X.rows());
    const int h = model.hidden_units();
    const int f = model.inputs();

    const Eigen::MatrixXd z = (X * model.w1.transpose()).rowwise() + model.b1.transpose();
    const Eigen::MatrixXd a = activate(model.activation, z);
    const Eigen::VectorXd yhat = (a * model.w2.transpose()).array() + model.b2;
    const Eigen::VectorXd err = yhat - y;

    const Eigen::VectorXd dy = (2.0 / m) * err;                      // dL/dyhat
    const Eigen::RowVectorXd gw2 = dy.transpose() * a;               // 1 x H
    const double gb2 = dy.sum();
    const Eigen::MatrixXd dz =
        (dy * model.w2).cwiseProduct(activate_derivative(model.activation, z));  // m x H
    const Eigen::MatrixXd gw1 = dz.transpose() * X;                  // H x F
    const Eigen::VectorXd gb1 = dz.colwise().sum();

    grad.resize(parameter_count(h, f));
    Eigen::Index pos = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < f; ++j) grad(pos++) = gw1(i, j);
    grad.segment(pos, h) = gb1;
    pos += h;
    grad.segment(pos, h) = gw2.transpose();
    pos += h;
    grad(pos) = gb2;

    return err.squaredNorm() / m;
}

namespace {

MlpModel init_model(int neurons, int inputs, Activation activation, std::uint64_t seed) {
    MlpModel model;
    model.activation = activation;
    model.w1.resize(neurons, inputs);
    model.b1 = Eigen::VectorXd::Zero(neurons);
    model.w2.resize(neurons);
    model.b2 = 0.0;

    Rng rng(seed);
    const double bound1 = std::sqrt(6.0 / (inputs + neurons));
    for (int i = 0; i < neurons; ++i)
        for (int j = 0; j < inputs; ++j) model.w1(i, j) = rng.uniform(-bound1, bound1);
    const double bound2 = std::sqrt(6.0 / (neurons + 1));
    for (int i = 0; i < neurons; ++i) model.w2(i) = rng.uniform(-bound2, bound2);
    return model;
}

TrainOutcome train_lbfgs(MlpModel model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const TrainLimits& limits) {
    MlpModel scratch = model;
    const Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        unpack_parameters(theta, scratch);
        return mse_and_gradient(scratch, X, y, grad);
    };

    LbfgsOptions opt;
    opt.max_iterations = limits.max_iterations;
    opt.gradient_tol = limits.gradient_tol;
    opt.loss_tol = limits.loss_tol;
    const LbfgsResult res = lbfgs_minimize(objective, pack_parameters(model), opt);

    TrainOutcome out;
    unpack_parameters(res.x, model);
    out.model = std::move(model);
    out.report.final_train_mse = res.fx;
    out.report.iterations = res.iterations;
    out.report.converged = res.converged;
    out.report.loss_history = res.history;
    return out;
}

// shared epoch loop for the two stochastic trainers
template <typename StepFn>
TrainOutcome train_stochastic(MlpModel model, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, std::uint64_t seed,
                              const TrainLimits& limits, StepFn step) {
    const Eigen::Index n = X.rows();
    Eigen::VectorXd theta = pack_parameters(model);
    Eigen::VectorXd grad(theta.size());
    MlpModel scratch = model;

    TrainOutcome out;
    Eigen::VectorXd best_theta = theta;
    unpack_parameters(theta, scratch);
    double best_loss = mse_loss(scratch, X, y);
    double prev_loss = best_loss;
    out.report.loss_history.push_back(best_loss);

    Rng rng(derive_seed(seed, 0x5d1f));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    const int batch = std::max(1, std::min<int>(limits.batch_size, static_cast<int>(n)));
    int epoch = 0;
    bool converged = false;
    bool diverged = false;
    for (; epoch < limits.max_iterations && !diverged; ++epoch) {
        rng.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += batch) {
            if (!theta.allFinite()) { diverged = true; break; }
            const Eigen::Index count = std::min<Eigen::Index>(batch, n - start);
            Eigen::MatrixXd bx(count, X.cols());
            Eigen::VectorXd by(count);
            for (Eigen::Index i = 0; i < count; ++i) {
                bx.row(i) = X.row(order[static_cast<std::size_t>(start + i)]);
                by(i) = y(order[static_cast<std::size_t>(start + i)]);
            }
            unpack_parameters(theta, scratch);
            mse_and_gradient(scratch, bx, by, grad);
            step(theta, grad);
        }
        if (diverged || !theta.allFinite()) { diverged = true; break; }

        unpack_parameters(theta, scratch);
        const double loss = mse_loss(scratch, X, y);
        if (!std::isfinite(loss)) { diverged = true; break; }
        out.report.loss_history.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best_theta = theta;
        }
        Eigen::VectorXd full_grad(theta.size());
        mse_and_gradient(scratch, X, y, full_grad);
        if (full_grad.norm() < limits.gradient_tol ||
            std::abs(prev_loss - loss) < limits.loss_tol) {
            converged = true;
            ++epoch;
            break;
        }
        prev_loss = loss;
    }

    unpack_parameters(best_theta, scratch);
    out.model = scratch;
    out.report.final_train_mse = best_loss;
    out.report.iterations = epoch;
    out.report.converged = converged && !diverged;
    return out;
}

}  // namespace

TrainOutcome train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int neurons,
                   Activation activation, Solver solver, std::uint64_t seed,
                   const TrainLimits& limits) {
    if (X.rows() == 0) throw std::invalid_argument("train: empty data");
    if (X.rows() != y.size()) throw std::invalid_argument("train: feature/target size mismatch");
    if (neurons < 1) throw std::invalid_argument("train: neurons must be >= 1");

    MlpModel model = init_model(neurons, static_cast<int>(X.cols()), activation, seed);
    model.provenance.solver = solver;
    model.provenance.neurons = neurons;
    model.provenance.seed = seed;

    TrainOutcome out;
    switch (solver) {
        case Solver::Lbfgs:
            out = train_lbfgs(std::move(model), X, y, limits);
            break;
        case Solver::Sgd: {
            Eigen::VectorXd velocity;
            out = train_stochastic(std::move(model), X, y, seed, limits,
                                   [&](Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
                                       if (velocity.size() != theta.size())
                                           velocity = Eigen::VectorXd::Zero(theta.size());
                                       velocity = limits.sgd_momentum * velocity -
                                                  limits.sgd_learning_rate * grad;
                                       theta += velocity;
                                   });
            break;
        }
        case Solver::Adam: {
            Eigen::VectorXd m1, m2;
            long t = 0;
            out = train_stochastic(std::move(model), X, y, seed, limits,
                                   [&](Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
                                       if (m1.size() != theta.size()) {
                                           m1 = Eigen::VectorXd::Zero(theta.size());
                                           m2 = Eigen::VectorXd::Zero(theta.size());
                                       }
                                       ++t;
                                       m1 = limits.adam_beta1 * m1 + (1.0 - limits.adam_beta1) * grad;
                                       m2 = limits.adam_beta2 * m2 +
                                            (1.0 - limits.adam_beta2) * grad.cwiseProduct(grad);
                                       const double c1 =
                                           1.0 - std::pow(limits.adam_beta1, static_cast<double>(t));
                                       const double c2 =
                                           1.0 - std::pow(limits.adam_beta2, static_cast<double>(t));
                                       theta -= limits.adam_learning_rate *
                                                ((m1 / c1).array() /
                                                 ((m2 / c2).array().sqrt() + limits.adam_epsilon))
                                                    .matrix();
                                   });
            break;
        }
    }
    out.model.provenance.solver = solver;
    out.model.provenance.neurons = neurons;
    out.model.provenance.seed = seed;
    return out;
}

GridSearchResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const GridSpec& grid) {
    const Eigen::Index n = X.rows();
    if (grid.neurons_min < 1 || grid.neurons_max < grid.neurons_min ||
        grid.activations.empty() || grid.solvers.empty())
        throw std::invalid_argument("grid_search: empty grid");
    if (grid.folds < 2) throw std::invalid_argument("grid_search: folds must be >= 2");
    if (n < grid.folds) throw std::invalid_argument("grid_search: fewer samples than folds");

    // shared seeded folding: contiguous slices of one shuffled order
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(derive_seed(grid.seed, 0xf01d));
    rng.shuffle(order);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto f = static_cast<int>((i * grid.folds) / n);
        fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = f;
    }

    GridSearchResult result;
    result.fold_of_sample = fold_of;

    std::size_t candidate_index = 0;
    bool have_best = false;
    for (int neurons = grid.neurons_min; neurons <= grid.neurons_max; ++neurons) {
        for (Activation activation : grid.activations) {
            for (Solver solver : grid.solvers) {
                CandidateScore score;
                score.neurons = neurons;
                score.activation = activation;
                score.solver = solver;

                double total = 0.0;
                bool valid = true;
                for (int f = 0; f < grid.folds; ++f) {
                    std::vector<Eigen::Index> tr, va;
                    for (Eigen::Index i = 0; i < n; ++i) {
                        (fold_of[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
                    }
                    Eigen::MatrixXd xt(static_cast<Eigen::Index>(tr.size()), X.cols());
                    Eigen::VectorXd yt(static_cast<Eigen::Index>(tr.size()));
                    for (std::size_t i = 0; i < tr.size(); ++i) {
                        xt.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
                        yt(static_cast<Eigen::Index>(i)) = y(tr[i]);
                    }
                    Eigen::MatrixXd xv(static_cast<Eigen::Index>(va.size()), X.cols());
                    Eigen::VectorXd yv(static_cast<Eigen::Index>(va.size()));
                    for (std::size_t i = 0; i < va.size(); ++i) {
                        xv.row(static_cast<Eigen::Index>(i)) = X.row(va[i]);
                        yv(static_cast<Eigen::Index>(i)) = y(va[i]);
                    }

                    const std::uint64_t fold_seed =
                        derive_seed(grid.seed, candidate_index, static_cast<std::uint64_t>(f));
                    const TrainOutcome fit =
                        train(xt, yt, neurons, activation, solver, fold_seed, grid.limits);
                    const double mse = mse_loss(fit.model, xv, yv);
                    score.fold_mse.push_back(mse);
                    if (!std::isfinite(mse)) valid = false;
                    total += mse;
                }
                score.cv_mse = valid ? total / grid.folds
                                     : std::numeric_limits<double>::infinity();

                // strict < keeps the earliest candidate on ties, which is
                // exactly the spec tie order
                if (!have_best || score.cv_mse < result.best.cv_mse) {
                    result.best = score;
                    have_best = true;
                }
                result.table.push_back(std::move(score));
                ++candidate_index;
            }
        }
    }

    if (!have_best || !std::isfinite(result.best.cv_mse))
        throw NumericError("grid_search: every candidate diverged");
    return result;
}

}  // namespace hybreg
