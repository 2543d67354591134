#include "hybreg/lda.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "hybreg/errors.hpp"

namespace hybreg {

namespace {
constexpr double kScatterRidge = 1e-8;
}

LdaProjection fit_lda(const Eigen::MatrixXd& data, const ClusterAssignment& labels) {
    const Eigen::Index n = data.rows();
    const Eigen::Index f = data.cols();
    const int k = labels.k;
    if (k < 2) throw std::invalid_argument("fit_lda: need at least 2 classes");
    for (int c = 0; c < k; ++c)
        if (labels.sizes[static_cast<std::size_t>(c)] < 2)
            throw std::invalid_argument("fit_lda: class " + std::to_string(c) +
                                        " has fewer than 2 members");

    LdaProjection p;
    p.global_mean = data.colwise().mean();
    p.class_means = Eigen::MatrixXd::Zero(k, f);
    for (Eigen::Index i = 0; i < n; ++i)
        p.class_means.row(labels.labels[static_cast<std::size_t>(i)]) += data.row(i);
    for (int c = 0; c < k; ++c)
        p.class_means.row(c) /= labels.sizes[static_cast<std::size_t>(c)];

    Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(f, f);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd d =
            data.row(i) - p.class_means.row(labels.labels[static_cast<std::size_t>(i)]);
        sw += d.transpose() * d;
    }
    sw.diagonal().array() += kScatterRidge;

    Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(f, f);
    for (int c = 0; c < k; ++c) {
        const Eigen::RowVectorXd d = p.class_means.row(c) - p.global_mean;
        sb += labels.sizes[static_cast<std::size_t>(c)] * (d.transpose() * d);
    }

    // symmetrize via Sw^{-1/2}: eigenvectors of Sw^{-1/2} Sb Sw^{-1/2}
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sw_solver(sw);
    if (sw_solver.info() != Eigen::Success)
        throw NumericError("fit_lda: within-class scatter decomposition failed");
    if (sw_solver.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("fit_lda: within-class scatter singular beyond regularization");
    const Eigen::MatrixXd w_inv_sqrt =
        sw_solver.eigenvectors() *
        sw_solver.eigenvalues().array().rsqrt().matrix().asDiagonal() *
        sw_solver.eigenvectors().transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w_inv_sqrt * sb * w_inv_sqrt);
    if (solver.info() != Eigen::Success)
        throw NumericError("fit_lda: eigensolver failed");

    // eigenvalues ascending; top discriminants sit in the last columns
    const Eigen::VectorXd evals = solver.eigenvalues();
    const double lead = evals(f - 1);
    const bool rank_one = f < 2 || evals(f - 2) <= std::max(1e-10, 1e-9 * std::abs(lead));

    p.basis.resize(f, 2);
    Eigen::VectorXd first = w_inv_sqrt * solver.eigenvectors().col(f - 1);
    first.normalize();
    p.basis.col(0) = first;

    if (!rank_one) {
        Eigen::VectorXd second = w_inv_sqrt * solver.eigenvectors().col(f - 2);
        second.normalize();
        p.basis.col(1) = second;
    } else {
        // rank-1 between-class scatter (K = 2): pad with the axis direction
        // least aligned with the first discriminant, orthogonalized
        Eigen::Index pad_axis = 0;
        double smallest = std::abs(first(0));
        for (Eigen::Index j = 1; j < f; ++j) {
            if (std::abs(first(j)) < smallest) {
                smallest = std::abs(first(j));
                pad_axis = j;
            }
        }
        Eigen::VectorXd second = Eigen::VectorXd::Zero(f);
        second(pad_axis) = 1.0;
        second -= first * first.dot(second);
        second.normalize();
        p.basis.col(1) = second;
    }
    return p;
}

Eigen::MatrixXd project(const LdaProjection& p, const Eigen::MatrixXd& data) {
    if (data.cols() != p.basis.rows())
        throw std::invalid_argument("project: dimension mismatch");
    return (data.rowwise() - p.global_mean) * p.basis;
}

}  // namespace hybreg
