#pragma once

#include <cstdint>
#include <vector>

#include "rcfm/dataset.hpp"

namespace rcfm {

/// Sentinel label for points DBSCAN leaves unassigned.
inline constexpr int kNoiseLabel = -1;

struct DbscanResult {
    std::vector<int> assignment;          // cluster id in [0,k) or kNoiseLabel
    int k = 0;                            // number of clusters found
    std::vector<std::size_t> noise_ids;   // indices of noise points, ascending
};

/// Per-sweep diagnostics for the fuzzy c-means loop; used by tests.
struct FcmTrace {
    std::vector<Matrix> memberships;   // U after each sweep
    std::vector<double> objective;     // sum_ik u^m d^2 after each sweep
};

/// Lloyd's algorithm. Initial centers are k distinct rows sampled with the
/// seeded generator; an emptied cluster is re-seeded at the point farthest
/// from its current center. Stops when the largest center shift drops below
/// tol or after max_iter sweeps.
Partition kmeans(const Dataset& data, int k, std::uint64_t seed, int max_iter = 100,
                 double tol = 1e-8, std::vector<double>* objective_trace = nullptr);

/// k-medoids: greedy BUILD then best-improvement SWAP on total Euclidean
/// dissimilarity. Medoids are dataset rows (reported through medoids_out
/// when given, sorted ascending). The seed is accepted for interface
/// uniformity; BUILD/SWAP themselves are deterministic.
Partition pam(const Dataset& data, int k, std::uint64_t seed, int max_iter = 100,
              std::vector<std::size_t>* medoids_out = nullptr);

/// Fuzzy c-means with Euclidean distance and membership exponent 2/(m-1).
/// Initial centers are c distinct seeded rows. Stops when max |dU| <= tol.
FuzzyPartition fuzzy_cmeans(const Dataset& data, int c, double m, double tol, std::uint64_t seed,
                            int max_iter = 300, FcmTrace* trace = nullptr);

/// Fuzzy c-means continued from a given membership matrix (each sweep:
/// centers from U, then U from center distances).
FuzzyPartition fuzzy_cmeans_from(const Dataset& data, const FuzzyPartition& u0, double m,
                                 double tol, int max_iter, FcmTrace* trace = nullptr);

/// Classic density clustering. Neighborhood counts include the point itself;
/// a border point joins the first cluster whose expansion reaches it (cluster
/// ids are assigned in scan order, so that is the cluster with the lowest id
/// among those that can reach it).
DbscanResult dbscan(const Dataset& data, double eps, int min_pts);

}  // namespace rcfm
