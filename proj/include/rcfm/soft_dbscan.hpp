#pragma once

#include <optional>
#include <vector>

#include "rcfm/clustering.hpp"
#include "rcfm/dataset.hpp"

namespace rcfm {

/// Exponent used in the fuzzy membership update.
enum class ExponentMode {
    standard,   // p = 2/(m-1), the usual derivation
    alternate,  // p = m/(m-1)
};

struct SoftDbscanConfig {
    double eps = 1.0;
    int min_pts = 4;
    double m = 2.5;       // weighting exponent; values in (1,2] accepted with a warning
    double xi = 1e-4;     // stop when max |U_t - U_{t-1}| <= xi
    int max_iter = 300;
    ExponentMode exponent_mode = ExponentMode::standard;
    /// Ridge added to each cluster covariance before inversion. Unset means
    /// scale-aware: 1e-6 * trace(covariance of the whole dataset) / M.
    std::optional<double> cov_reg;

    void validate() const;
};

struct SoftDbscanOutput {
    FuzzyPartition memberships;             // c x n, c = clusters + noise singletons
    Matrix centers;                         // c x M
    std::vector<int> noise_seeded;          // cluster ids that began as noise singletons
    std::vector<std::size_t> noisy_points;  // points whose argmax lands on a noise-seeded cluster
    int iterations = 0;
};

struct MaintainedDataset {
    Dataset reduced;                            // kept rows, original order
    std::vector<std::size_t> removed_noisy;
    std::vector<std::size_t> removed_redundant;
    std::vector<std::size_t> kept;
};

/// sqrt((x-v)^T cov_inverse (x-v)). cov_inverse must be symmetric and finite.
double mahalanobis(std::span<const double> x, std::span<const double> v, const Matrix& cov_inverse);

/// Membership-weighted covariance per cluster, each regularized with
/// cov_reg * I and inverted. Throws when a regularized covariance is
/// singular (cov_reg = 0 on a degenerate cluster).
std::vector<Matrix> fuzzy_covariance(const Dataset& data, const FuzzyPartition& u,
                                     const Matrix& centers, double m, double cov_reg);

/// u_ik = 1 / sum_j (d_ik / d_jk)^p from a c x n matrix of distances. A zero
/// distance takes the whole column (lowest cluster index first).
FuzzyPartition membership_update(const Matrix& distances, double m, ExponentMode mode);

/// v_i = sum_k u_ik^m x_k / sum_k u_ik^m. A cluster with zero membership mass
/// keeps its previous center (zeros when no previous centers are given).
Matrix centers_update(const Dataset& data, const FuzzyPartition& u, double m,
                      const Matrix* previous = nullptr);

/// Density-seeded fuzzy clustering: DBSCAN provides k clusters plus x noise
/// points, each noise point opens its own singleton cluster (c = k + x), and
/// the crisp seed partition is refined by Mahalanobis-distance fuzzy sweeps.
/// Points whose final argmax membership lies in a noise-seeded cluster are
/// reported as noisy.
SoftDbscanOutput soft_dbscan(const Dataset& data, const SoftDbscanConfig& cfg,
                             std::vector<Matrix>* u_trace = nullptr);

/// Removes the noisy points found by soft_dbscan, then within each argmax
/// cluster drops points lying within dedup_radius of an already kept point
/// of the same cluster (scanning in index order).
MaintainedDataset maintain(const Dataset& data, const SoftDbscanConfig& cfg, double dedup_radius);

}  // namespace rcfm
