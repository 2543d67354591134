#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hybreg {

enum class Kind { KMeans, GaussianMixture, Agglomerative, Spectral };
enum class Linkage { Ward, Complete, Average, Single };

std::string kind_name(Kind k);          // machine name, e.g. "kmeans"
std::string kind_display_name(Kind k);  // report name, e.g. "K-Means"
Kind parse_kind(const std::string& name);
std::string linkage_name(Linkage l);
Linkage parse_linkage(const std::string& name);

struct ClusterAssignment {
    std::vector<int> labels;  // cluster id per sample, 0..k-1
    int k = 0;
    std::vector<int> sizes;  // per-cluster counts; every cluster non-empty
};

struct GmmParams {
    Eigen::VectorXd weights;                  // K, nonnegative, sums to 1
    Eigen::MatrixXd means;                    // K x F
    std::vector<Eigen::MatrixXd> covariances; // K of F x F, SPD after regularization
};

/// Fitted clustering plus the state the out-of-sample router needs.
/// `centroids` holds k-means centroids, Gaussian means, or cluster member
/// means (agglomerative/spectral).
struct ClusterModel {
    Kind kind = Kind::KMeans;
    int k = 0;
    Eigen::MatrixXd centroids;  // K x F, in the (scaled) feature space
    std::optional<GmmParams> gmm;
    std::uint64_t seed = 0;
};

struct ClusterFit {
    ClusterModel model;
    ClusterAssignment assignment;
    double inertia = 0.0;                       // k-means objective of the returned partition
    std::vector<double> inertia_history;        // per Lloyd iteration, best restart
    double log_likelihood = 0.0;                // GMM only
    std::vector<double> log_likelihood_history; // per EM iteration
};

struct SimilarityGraph {
    Eigen::MatrixXd affinity;  // N x N, symmetric, zero diagonal
    Eigen::VectorXd degree;    // row sums
    double gamma = 0.0;
};

ClusterFit kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                  int max_iter = 300, double tol = 1e-6, int n_init = 10);

ClusterFit gaussian_mixture(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                            int max_iter = 200, double tol = 1e-6);

ClusterFit agglomerative(const Eigen::MatrixXd& data, int k,
                         Linkage linkage = Linkage::Ward);

/// Dense Gaussian-kernel similarity graph. gamma defaults to 1/(2 sigma^2)
/// with sigma the median pairwise distance.
SimilarityGraph build_similarity_graph(const Eigen::MatrixXd& data,
                                       std::optional<double> gamma = std::nullopt);

ClusterFit spectral(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                    std::optional<double> gamma = std::nullopt);

/// Log posterior responsibilities under a Gaussian mixture, one row per
/// sample, normalized with log-sum-exp.
Eigen::MatrixXd gmm_log_responsibilities(const GmmParams& gmm, const Eigen::MatrixXd& data);

/// Out-of-sample assignment: nearest centroid for kmeans/agglomerative/
/// spectral, argmax posterior for the Gaussian mixture. Ties go to the
/// lowest cluster id.
int route(const ClusterModel& model, const Eigen::VectorXd& x);

}  // namespace hybreg
