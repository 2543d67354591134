#include "hybreg/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace hybreg {

namespace {

struct Probe {
    double alpha;
    double value;
    double slope;  // gradient . direction
};

// Strong-Wolfe line search (bracket + zoom with bisection). Returns the
// accepted step length, or 0 when no acceptable step exists.
double wolfe_line_search(const Objective& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& direction, double f0, double slope0,
                         Eigen::VectorXd& x_out, double& f_out, Eigen::VectorXd& g_out,
                         const LbfgsOptions& opt) {
    const double c1 = opt.wolfe_c1;
    const double c2 = opt.wolfe_c2;

    auto probe = [&](double alpha) {
        x_out = x + alpha * direction;
        f_out = f(x_out, g_out);
        return Probe{alpha, f_out, g_out.dot(direction)};
    };

    auto zoom = [&](Probe lo, Probe hi) -> double {
        for (int i = 0; i < opt.max_line_search; ++i) {
            const double alpha = 0.5 * (lo.alpha + hi.alpha);
            Probe t = probe(alpha);
            if (!std::isfinite(t.value) || t.value > f0 + c1 * alpha * slope0 ||
                t.value >= lo.value) {
                hi = t;
            } else {
                if (std::abs(t.slope) <= -c2 * slope0) return t.alpha;
                if (t.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = t;
            }
            if (std::abs(hi.alpha - lo.alpha) < 1e-16) break;
        }
        // fall back to the sufficient-decrease endpoint
        if (lo.value < f0) return probe(lo.alpha).alpha;
        return 0.0;
    };

    Probe prev{0.0, f0, slope0};
    double alpha = 1.0;
    for (int i = 0; i < opt.max_line_search; ++i) {
        Probe t = probe(alpha);
        if (!std::isfinite(t.value) || t.value > f0 + c1 * alpha * slope0 ||
            (i > 0 && t.value >= prev.value)) {
            return zoom(prev, t);
        }
        if (std::abs(t.slope) <= -c2 * slope0) return t.alpha;
        if (t.slope >= 0.0) return zoom(t, prev);
        prev = t;
        alpha *= 2.0;
    }
    return 0.0;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& opt) {
    const Eigen::Index dim = x0.size();
    LbfgsResult result;

    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd grad(dim);
    double fx = f(x, grad);

    result.x = x;
    result.fx = fx;
    result.history.push_back(fx);

    std::deque<Eigen::VectorXd> s_list, y_list;
    std::deque<double> rho_list;

    Eigen::VectorXd x_new(dim), g_new(dim);
    double f_new = fx;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        if (grad.norm() < opt.gradient_tol) {
            result.converged = true;
            break;
        }

        // two-loop recursion
        Eigen::VectorXd direction = -grad;
        std::vector<double> alpha_store(s_list.size());
        for (std::size_t i = s_list.size(); i-- > 0;) {
            alpha_store[i] = rho_list[i] * s_list[i].dot(direction);
            direction -= alpha_store[i] * y_list[i];
        }
        if (!s_list.empty()) {
            const double gamma =
                s_list.back().dot(y_list.back()) / y_list.back().squaredNorm();
            direction *= gamma;
        }
        for (std::size_t i = 0; i < s_list.size(); ++i) {
            const double beta = rho_list[i] * y_list[i].dot(direction);
            direction += (alpha_store[i] - beta) * s_list[i];
        }

        double slope = grad.dot(direction);
        if (slope >= 0.0) {
            // memory produced a non-descent direction; restart from steepest descent
            s_list.clear();
            y_list.clear();
            rho_list.clear();
            direction = -grad;
            slope = grad.dot(direction);
            if (slope >= 0.0) {
                result.converged = true;
                break;
            }
        }

        const double step = wolfe_line_search(f, x, direction, fx, slope,
                                              x_new, f_new, g_new, opt);
        if (step <= 0.0 || !std::isfinite(f_new)) break;  // line search stalled

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            s_list.push_back(s);
            y_list.push_back(y);
            rho_list.push_back(1.0 / sy);
            if (static_cast<int>(s_list.size()) > opt.memory) {
                s_list.pop_front();
                y_list.pop_front();
                rho_list.pop_front();
            }
        }

        const double improvement = fx - f_new;
        x = x_new;
        grad = g_new;
        fx = f_new;
        result.iterations = iter + 1;
        result.history.push_back(fx);
        if (fx < result.fx) {
            result.fx = fx;
            result.x = x;
        }

        if (improvement < opt.loss_tol) {
            result.converged = true;
            break;
        }
    }

    if (grad.norm() < opt.gradient_tol) result.converged = true;
    return result;
}

}  // namespace hybreg
