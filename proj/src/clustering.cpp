#include "hybreg/clustering.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hybreg/errors.hpp"
#include "hybreg/rng.hpp"

namespace hybreg {

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::KMeans: return "kmeans";
        case Kind::GaussianMixture: return "gaussian_mixture";
        case Kind::Agglomerative: return "agglomerative";
        case Kind::Spectral: return "spectral";
    }
    return "?";
}

std::string kind_display_name(Kind k) {
    switch (k) {
        case Kind::KMeans: return "K-Means";
        case Kind::GaussianMixture: return "Gaussian Mixture";
        case Kind::Agglomerative: return "Agglomerative Clustering";
        case Kind::Spectral: return "Spectral Clustering";
    }
    return "?";
}

Kind parse_kind(const std::string& name) {
    if (name == "kmeans") return Kind::KMeans;
    if (name == "gaussian_mixture" || name == "gmm") return Kind::GaussianMixture;
    if (name == "agglomerative") return Kind::Agglomerative;
    if (name == "spectral") return Kind::Spectral;
    throw std::invalid_argument("unknown clustering kind: " + name);
}

std::string linkage_name(Linkage l) {
    switch (l) {
        case Linkage::Ward: return "ward";
        case Linkage::Complete: return "complete";
        case Linkage::Average: return "average";
        case Linkage::Single: return "single";
    }
    return "?";
}

Linkage parse_linkage(const std::string& name) {
    if (name == "ward") return Linkage::Ward;
    if (name == "complete") return Linkage::Complete;
    if (name == "average") return Linkage::Average;
    if (name == "single") return Linkage::Single;
    throw std::invalid_argument("unknown linkage: " + name);
}

namespace {

ClusterAssignment make_assignment(std::vector<int> labels, int k) {
    ClusterAssignment a;
    a.labels = std::move(labels);
    a.k = k;
    a.sizes.assign(static_cast<std::size_t>(k), 0);
    for (int id : a.labels) a.sizes[static_cast<std::size_t>(id)]++;
    return a;
}

void require_full(const ClusterAssignment& a, const char* algo) {
    for (int s : a.sizes) {
        if (s == 0)
            throw NumericError(std::string(algo) + ": run failed, fewer than k non-empty clusters");
    }
}

Eigen::MatrixXd label_means(const Eigen::MatrixXd& data, const std::vector<int>& labels, int k) {
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, data.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        means.row(labels[static_cast<std::size_t>(i)]) += data.row(i);
        counts(labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int j = 0; j < k; ++j)
        if (counts(j) > 0) means.row(j) /= counts(j);
    return means;
}

// ---------------------------------------------------------------- k-means

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& data, int k, Rng& rng) {
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd centroids(k, data.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);

    Eigen::Index first = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    centroids.row(0) = data.row(first);
    chosen[static_cast<std::size_t>(first)] = true;

    Eigen::VectorXd dist2 =
        (data.rowwise() - centroids.row(0)).rowwise().squaredNorm();

    for (int c = 1; c < k; ++c) {
        const double total = dist2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= dist2(i);
                if (r <= 0.0) { pick = i; break; }
            }
            if (pick < 0) pick = n - 1;
        } else {
            // all remaining points coincide with a centroid
            for (Eigen::Index i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) { pick = i; break; }
            if (pick < 0) pick = 0;
        }
        centroids.row(c) = data.row(pick);
        chosen[static_cast<std::size_t>(pick)] = true;
        dist2 = dist2.cwiseMin(
            (data.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }
    return centroids;
}

// nearest centroid, lowest index on ties
int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x,
                     double* best_out = nullptr) {
    int best = 0;
    double best_d = (x - centroids.row(0)).squaredNorm();
    for (int c = 1; c < centroids.rows(); ++c) {
        const double d = (x - centroids.row(c)).squaredNorm();
        if (d < best_d) { best_d = d; best = c; }
    }
    if (best_out) *best_out = best_d;
    return best;
}

struct LloydRun {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;  // means of the final partition
    double inertia = 0.0;
    std::vector<double> history;
};

LloydRun lloyd(const Eigen::MatrixXd& data, int k, Rng& rng, int max_iter, double tol) {
    const Eigen::Index n = data.rows();
    LloydRun run;
    run.centroids = kmeanspp_init(data, k, rng);
    run.labels.assign(static_cast<std::size_t>(n), 0);
    std::vector<double> point_dist(static_cast<std::size_t>(n), 0.0);

    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double d;
            run.labels[static_cast<std::size_t>(i)] =
                nearest_centroid(run.centroids, data.row(i), &d);
            point_dist[static_cast<std::size_t>(i)] = d;
            inertia += d;
        }

        // reseed empty clusters to the point farthest from its centroid
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int id : run.labels) counts[static_cast<std::size_t>(id)]++;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                if (counts[static_cast<std::size_t>(run.labels[ui])] <= 1) continue;
                if (point_dist[ui] > far_d) { far_d = point_dist[ui]; far = i; }
            }
            const auto uf = static_cast<std::size_t>(far);
            inertia -= point_dist[uf];
            counts[static_cast<std::size_t>(run.labels[uf])]--;
            run.labels[uf] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            point_dist[uf] = 0.0;
            run.centroids.row(c) = data.row(far);
        }
        run.history.push_back(inertia);

        // update step
        const Eigen::MatrixXd next = label_means(data, run.labels, k);
        const double shift = (next - run.centroids).rowwise().norm().maxCoeff();
        run.centroids = next;
        if (shift < tol) break;
    }

    // report the partition objective: distances to the partition means
    run.centroids = label_means(data, run.labels, k);
    run.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        run.inertia +=
            (data.row(i) - run.centroids.row(run.labels[static_cast<std::size_t>(i)]))
                .squaredNorm();
    return run;
}

// -------------------------------------------------------- gaussian mixture

// log N(x | mu, Sigma) for every row of data, via the Cholesky factor of Sigma
Eigen::VectorXd gaussian_log_density(const Eigen::MatrixXd& data,
                                     const Eigen::RowVectorXd& mean,
                                     const Eigen::MatrixXd& cov) {
    const Eigen::Index d = data.cols();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw NumericError("gaussian_mixture: covariance not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) log_det += 2.0 * std::log(L(i, i));

    const Eigen::MatrixXd centered = data.rowwise() - mean;
    const Eigen::MatrixXd solved = L.triangularView<Eigen::Lower>().solve(centered.transpose());
    const Eigen::VectorXd quad = solved.colwise().squaredNorm();
    const double norm_const =
        static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det;
    return -0.5 * (quad.array() + norm_const);
}

constexpr double kCovarianceRidge = 1e-6;

Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& data,
                                    const Eigen::RowVectorXd& mean,
                                    const Eigen::VectorXd& resp, double resp_sum) {
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * resp.asDiagonal() * centered;
    cov /= std::max(resp_sum, 1e-300);
    cov.diagonal().array() += kCovarianceRidge;
    return cov;
}

}  // namespace

ClusterFit kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                  int max_iter, double tol, int n_init) {
    const Eigen::Index n = data.rows();
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > n) throw std::invalid_argument("kmeans: k exceeds sample count");
    if (!(tol > 0.0)) throw std::invalid_argument("kmeans: tol must be positive");

    LloydRun best;
    bool have_best = false;
    for (int restart = 0; restart < n_init; ++restart) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
        LloydRun run = lloyd(data, k, rng, max_iter, tol);
        if (!have_best || run.inertia < best.inertia) {
            best = std::move(run);
            have_best = true;
        }
    }

    ClusterFit fit;
    fit.model.kind = Kind::KMeans;
    fit.model.k = k;
    fit.model.centroids = best.centroids;
    fit.model.seed = seed;
    fit.assignment = make_assignment(best.labels, k);
    fit.inertia = best.inertia;
    fit.inertia_history = best.history;
    require_full(fit.assignment, "kmeans");
    return fit;
}

ClusterFit gaussian_mixture(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                            int max_iter, double tol) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (k < 1) throw std::invalid_argument("gaussian_mixture: k must be >= 1");
    if (n <= k) throw std::invalid_argument("gaussian_mixture: need more samples than components");

    // k-means initialization
    const ClusterFit init = kmeans(data, k, seed);
    GmmParams p;
    p.weights.resize(k);
    p.means = init.model.centroids;
    p.covariances.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        Eigen::VectorXd resp = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (init.assignment.labels[static_cast<std::size_t>(i)] == j) resp(i) = 1.0;
        const double nj = resp.sum();
        p.weights(j) = nj / static_cast<double>(n);
        p.covariances[static_cast<std::size_t>(j)] =
            weighted_covariance(data, p.means.row(j), resp, nj);
    }

    std::vector<double> history;
    Eigen::MatrixXd log_resp(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // E step
        log_resp = gmm_log_responsibilities(p, data);
        double ll = 0.0;
        // gmm_log_responsibilities normalizes in place; recompute the joint
        // to get the data log-likelihood
        {
            Eigen::MatrixXd joint(n, k);
            for (int j = 0; j < k; ++j)
                joint.col(j) = gaussian_log_density(data, p.means.row(j),
                                                    p.covariances[static_cast<std::size_t>(j)])
                                   .array() +
                               std::log(std::max(p.weights(j), 1e-300));
            for (Eigen::Index i = 0; i < n; ++i) {
                const double m = joint.row(i).maxCoeff();
                ll += m + std::log((joint.row(i).array() - m).exp().sum());
            }
        }
        history.push_back(ll);
        if (iter > 0 && std::abs(ll - prev_ll) < tol) break;
        prev_ll = ll;

        // M step
        const Eigen::MatrixXd resp = log_resp.array().exp();
        for (int j = 0; j < k; ++j) {
            const Eigen::VectorXd rj = resp.col(j);
            const double nj = rj.sum();
            p.weights(j) = nj / static_cast<double>(n);
            if (nj > 1e-300) p.means.row(j) = (rj.transpose() * data) / nj;
            p.covariances[static_cast<std::size_t>(j)] =
                weighted_covariance(data, p.means.row(j), rj, nj);
        }
    }

    // final E step so labels match the returned parameters
    log_resp = gmm_log_responsibilities(p, data);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (log_resp(i, j) > log_resp(i, best)) best = j;
        labels[static_cast<std::size_t>(i)] = best;
    }

    ClusterFit fit;
    fit.model.kind = Kind::GaussianMixture;
    fit.model.k = k;
    fit.model.centroids = p.means;
    fit.model.gmm = std::move(p);
    fit.model.seed = seed;
    fit.assignment = make_assignment(std::move(labels), k);
    fit.log_likelihood = history.empty() ? 0.0 : history.back();
    fit.log_likelihood_history = std::move(history);
    require_full(fit.assignment, "gaussian_mixture");
    (void)d;
    return fit;
}

Eigen::MatrixXd gmm_log_responsibilities(const GmmParams& gmm, const Eigen::MatrixXd& data) {
    const Eigen::Index n = data.rows();
    const auto k = static_cast<int>(gmm.weights.size());
    Eigen::MatrixXd log_r(n, k);
    for (int j = 0; j < k; ++j)
        log_r.col(j) = gaussian_log_density(data, gmm.means.row(j),
                                            gmm.covariances[static_cast<std::size_t>(j)])
                           .array() +
                       std::log(std::max(gmm.weights(j), 1e-300));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = log_r.row(i).maxCoeff();
        const double lse = m + std::log((log_r.row(i).array() - m).exp().sum());
        log_r.row(i).array() -= lse;
    }
    return log_r;
}

// ----------------------------------------------------------- agglomerative

ClusterFit agglomerative(const Eigen::MatrixXd& data, int k, Linkage linkage) {
    const Eigen::Index n = data.rows();
    if (k < 1 || k > n) throw std::invalid_argument("agglomerative: k out of range");

    const auto un = static_cast<std::size_t>(n);
    const bool squared = (linkage == Linkage::Ward);

    // inter-cluster distances; ward works on squared Euclidean internally
    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (data.row(i) - data.row(j)).squaredNorm();
            const double d = squared ? d2 : std::sqrt(d2);
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    std::vector<bool> active(un, true);
    std::vector<double> size(un, 1.0);
    std::vector<int> nn(un, -1);
    std::vector<double> nnd(un, 0.0);
    std::vector<int> labels(un);
    for (std::size_t i = 0; i < un; ++i) labels[i] = static_cast<int>(i);

    auto rescan = [&](int i) {
        nn[static_cast<std::size_t>(i)] = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!active[static_cast<std::size_t>(j)] || j == i) continue;
            if (dist(i, j) < best) {
                best = dist(i, j);
                nn[static_cast<std::size_t>(i)] = static_cast<int>(j);
            }
        }
        nnd[static_cast<std::size_t>(i)] = best;
    };
    for (std::size_t i = 0; i < un; ++i) rescan(static_cast<int>(i));

    const int merges = static_cast<int>(n) - k;
    for (int step = 0; step < merges; ++step) {
        // globally closest active pair, lowest indices on ties
        int a = -1, b = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < un; ++i) {
            if (!active[i] || nn[i] < 0) continue;
            const int lo = std::min(static_cast<int>(i), nn[i]);
            const int hi = std::max(static_cast<int>(i), nn[i]);
            if (nnd[i] < best ||
                (nnd[i] == best && (lo < a || (lo == a && hi < b)))) {
                best = nnd[i];
                a = lo;
                b = hi;
            }
        }

        const double na = size[static_cast<std::size_t>(a)];
        const double nb = size[static_cast<std::size_t>(b)];
        const double dab = dist(a, b);
        active[static_cast<std::size_t>(b)] = false;

        // Lance-Williams update of d(a ∪ b, c) stored in row/col a
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (!active[uj] || j == a) continue;
            const double dac = dist(a, j);
            const double dbc = dist(b, j);
            double d = 0.0;
            switch (linkage) {
                case Linkage::Single: d = std::min(dac, dbc); break;
                case Linkage::Complete: d = std::max(dac, dbc); break;
                case Linkage::Average: d = (na * dac + nb * dbc) / (na + nb); break;
                case Linkage::Ward: {
                    const double nc = size[uj];
                    d = ((na + nc) * dac + (nb + nc) * dbc - nc * dab) / (na + nb + nc);
                    break;
                }
            }
            dist(a, j) = d;
            dist(j, a) = d;
        }
        size[static_cast<std::size_t>(a)] = na + nb;

        for (std::size_t i = 0; i < un; ++i)
            if (labels[i] == b) labels[i] = a;

        rescan(a);
        for (std::size_t i = 0; i < un; ++i) {
            if (!active[i] || static_cast<int>(i) == a) continue;
            if (nn[i] == a || nn[i] == b) {
                rescan(static_cast<int>(i));
            } else if (dist(static_cast<Eigen::Index>(i), a) < nnd[i]) {
                nn[i] = a;
                nnd[i] = dist(static_cast<Eigen::Index>(i), a);
            }
        }
    }

    // relabel surviving clusters 0..k-1 by ascending smallest member index
    std::vector<int> reps;
    for (std::size_t i = 0; i < un; ++i)
        if (active[i]) reps.push_back(static_cast<int>(i));
    std::sort(reps.begin(), reps.end());
    std::vector<int> remap(un, -1);
    for (std::size_t r = 0; r < reps.size(); ++r)
        remap[static_cast<std::size_t>(reps[r])] = static_cast<int>(r);
    std::vector<int> final_labels(un);
    for (std::size_t i = 0; i < un; ++i)
        final_labels[i] = remap[static_cast<std::size_t>(labels[i])];

    ClusterFit fit;
    fit.model.kind = Kind::Agglomerative;
    fit.model.k = k;
    fit.model.centroids = label_means(data, final_labels, k);
    fit.assignment = make_assignment(std::move(final_labels), k);
    require_full(fit.assignment, "agglomerative");
    return fit;
}

// ---------------------------------------------------------------- spectral

SimilarityGraph build_similarity_graph(const Eigen::MatrixXd& data,
                                       std::optional<double> gamma) {
    const Eigen::Index n = data.rows();
    if (n < 2) throw std::invalid_argument("build_similarity_graph: need at least 2 points");

    Eigen::MatrixXd sq(n, n);
    std::vector<double> pair_dist;
    pair_dist.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        sq(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (data.row(i) - data.row(j)).squaredNorm();
            sq(i, j) = d2;
            sq(j, i) = d2;
            pair_dist.push_back(std::sqrt(d2));
        }
    }

    double g;
    if (gamma) {
        g = *gamma;
    } else {
        const std::size_t mid = (pair_dist.size() - 1) / 2;
        std::nth_element(pair_dist.begin(), pair_dist.begin() + static_cast<std::ptrdiff_t>(mid),
                         pair_dist.end());
        const double sigma = pair_dist[mid];
        if (sigma <= 0.0)
            throw NumericError("build_similarity_graph: all points identical");
        g = 1.0 / (2.0 * sigma * sigma);
    }

    SimilarityGraph graph;
    graph.gamma = g;
    graph.affinity = (-g * sq.array()).exp();
    graph.affinity.diagonal().setZero();
    graph.degree = graph.affinity.rowwise().sum();
    return graph;
}

ClusterFit spectral(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                    std::optional<double> gamma) {
    const Eigen::Index n = data.rows();
    if (k < 2 || k > n) throw std::invalid_argument("spectral: k out of range");

    const SimilarityGraph graph = build_similarity_graph(data, gamma);
    if (graph.degree.minCoeff() <= 0.0)
        throw NumericError("spectral: degenerate graph, isolated vertex");

    // symmetric-normalized affinity D^{-1/2} A D^{-1/2}
    const Eigen::VectorXd dinv_sqrt = graph.degree.array().rsqrt();
    const Eigen::MatrixXd normalized =
        dinv_sqrt.asDiagonal() * graph.affinity * dinv_sqrt.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized);
    if (solver.info() != Eigen::Success)
        throw NumericError("spectral: eigensolver failed to converge");

    // eigenvalues come out ascending; the k largest span the embedding
    Eigen::MatrixXd embedding = solver.eigenvectors().rightCols(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = embedding.row(i).norm();
        if (norm > 1e-300) embedding.row(i) /= norm;
    }

    const ClusterFit km = kmeans(embedding, k, seed);

    ClusterFit fit;
    fit.model.kind = Kind::Spectral;
    fit.model.k = k;
    fit.model.centroids = label_means(data, km.assignment.labels, k);
    fit.model.seed = seed;
    fit.assignment = km.assignment;
    require_full(fit.assignment, "spectral");
    return fit;
}

// ------------------------------------------------------------------ router

int route(const ClusterModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.centroids.cols())
        throw std::invalid_argument("route: dimension mismatch");

    if (model.kind == Kind::GaussianMixture && model.gmm) {
        const GmmParams& gmm = *model.gmm;
        int best = 0;
        double best_lp = -std::numeric_limits<double>::infinity();
        const Eigen::MatrixXd row = x.transpose();
        for (int j = 0; j < model.k; ++j) {
            const double lp = gaussian_log_density(row, gmm.means.row(j),
                                                   gmm.covariances[static_cast<std::size_t>(j)])(0) +
                              std::log(std::max(gmm.weights(j), 1e-300));
            if (lp > best_lp) { best_lp = lp; best = j; }
        }
        return best;
    }
    return nearest_centroid(model.centroids, x.transpose());
}

}  // namespace hybreg
