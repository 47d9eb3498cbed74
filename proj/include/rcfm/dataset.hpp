#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rcfm/matrix.hpp"

namespace rcfm {

/// N samples of dimension M with per-row ids and optional class labels.
struct Dataset {
    Matrix points;                             // N x M
    std::vector<std::string> ids;              // N, unique
    std::optional<std::vector<int>> labels;    // class indices in [0, L)

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

/// Crisp assignment of N points to clusters 0..k-1.
struct Partition {
    std::vector<int> assignment;
    int k = 0;

    std::size_t size() const { return assignment.size(); }

    /// Throws unless every label is in [0, k) and every cluster is non-empty.
    void validate() const;
};

/// c x n membership matrix; every column sums to 1.
struct FuzzyPartition {
    Matrix memberships;   // c x n
    int c = 0;

    std::size_t size() const { return memberships.cols(); }
    void validate(double tol = 1e-9) const;
};

/// Reads a dataset from CSV: header row, optional leading "id" column,
/// optional trailing "label" column, everything else numeric features.
/// Label values are compacted to a dense 0..L-1 range (sorted by value).
Dataset load_csv(const std::string& path);

/// Writes a dataset in the same CSV layout load_csv reads.
void write_csv(const Dataset& data, const std::string& path);

/// k_p x k_q matrix of co-occurrence counts; entry (a,b) counts points with
/// p(i)=a and q(i)=b.
Matrix contingency(const Partition& p, const Partition& q);

/// Relabels p to best match the reference partition: the returned partition
/// permutes p's labels so that the diagonal of the contingency matrix with
/// the reference is maximal. Requires p.k == reference.k.
Partition align_labels(const Partition& p, const Partition& reference);

/// Number of points on which two same-length partitions agree exactly.
std::size_t agreement(const Partition& p, const Partition& q);

/// Fraction of points matched under the best injective cluster-to-class
/// mapping.
double clustering_accuracy(const Partition& pred, const std::vector<int>& truth);

/// Argmax memberships per column; ties go to the lowest cluster index.
Partition harden(const FuzzyPartition& fp);

/// Exact minimum-cost assignment on a square cost matrix; returns the column
/// assigned to each row.
std::vector<int> solve_assignment(const Matrix& cost);

}  // namespace rcfm
