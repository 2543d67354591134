#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace hybreg {

/// Objective callback: fills the gradient and returns the value.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-6;
    double loss_tol = 1e-8;
    int memory = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search = 30;
};

struct LbfgsResult {
    Eigen::VectorXd x;  // best point seen
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // objective after each accepted step
};

/// Limited-memory BFGS with a strong-Wolfe line search. The objective is
/// non-increasing across accepted steps; the best iterate is returned even
/// when the run stops on the iteration cap.
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

}  // namespace hybreg
