#include "rcfm/soft_dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace rcfm {

void SoftDbscanConfig::validate() const {
    if (eps <= 0.0) throw std::invalid_argument("soft_dbscan: eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("soft_dbscan: min_pts must be at least 1");
    if (m <= 1.0) throw std::invalid_argument("soft_dbscan: weighting exponent must exceed 1");
    if (xi <= 0.0) throw std::invalid_argument("soft_dbscan: tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("soft_dbscan: max_iter must be at least 1");
    if (cov_reg && *cov_reg < 0.0)
        throw std::invalid_argument("soft_dbscan: covariance ridge must be non-negative");
}

double mahalanobis(std::span<const double> x, std::span<const double> v, const Matrix& cov_inverse) {
    const std::size_t dim = x.size();
    if (v.size() != dim || cov_inverse.rows() != dim || cov_inverse.cols() != dim)
        throw std::invalid_argument("mahalanobis: dimension mismatch");
    if (!cov_inverse.all_finite())
        throw std::invalid_argument("mahalanobis: non-finite inverse covariance");
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j) {
            const double a = cov_inverse(i, j), b = cov_inverse(j, i);
            if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}))
                throw std::invalid_argument("mahalanobis: inverse covariance is not symmetric");
        }
    double q = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < dim; ++j) row += cov_inverse(i, j) * (x[j] - v[j]);
        q += (x[i] - v[i]) * row;
    }
    return std::sqrt(std::max(0.0, q));
}

std::vector<Matrix> fuzzy_covariance(const Dataset& data, const FuzzyPartition& u,
                                     const Matrix& centers, double m, double cov_reg) {
    const std::size_t c = static_cast<std::size_t>(u.c), n = data.size(), dim = data.dim();
    if (u.size() != n || centers.rows() != c || centers.cols() != dim)
        throw std::invalid_argument("fuzzy_covariance: shape mismatch");
    if (cov_reg < 0.0) throw std::invalid_argument("fuzzy_covariance: negative ridge");

    std::vector<Matrix> inverses;
    inverses.reserve(c);
    std::vector<double> diff(dim);
    for (std::size_t i = 0; i < c; ++i) {
        Matrix sigma(dim, dim, 0.0);
        double mass = 0.0;
        for (std::size_t kcol = 0; kcol < n; ++kcol) {
            const double w = std::pow(u.memberships(i, kcol), m);
            if (w == 0.0) continue;
            mass += w;
            for (std::size_t a = 0; a < dim; ++a) diff[a] = data.points(kcol, a) - centers(i, a);
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = a; b < dim; ++b) sigma(a, b) += w * diff[a] * diff[b];
        }
        if (mass > 0.0) {
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = a; b < dim; ++b) {
                    sigma(a, b) /= mass;
                    sigma(b, a) = sigma(a, b);
                }
        }
        for (std::size_t a = 0; a < dim; ++a) sigma(a, a) += cov_reg;
        try {
            inverses.push_back(spd_inverse(sigma));
        } catch (const std::runtime_error&) {
            throw std::runtime_error("fuzzy_covariance: singular covariance for cluster " +
                                     std::to_string(i) + " (increase cov_reg)");
        }
    }
    return inverses;
}

FuzzyPartition membership_update(const Matrix& distances, double m, ExponentMode mode) {
    if (m <= 1.0) throw std::invalid_argument("membership_update: weighting exponent must exceed 1");
    const std::size_t c = distances.rows(), n = distances.cols();
    if (c == 0 || n == 0) throw std::invalid_argument("membership_update: empty distance matrix");
    if (!distances.all_finite())
        throw std::invalid_argument("membership_update: non-finite distance");
    for (double d : distances.data())
        if (d < 0.0) throw std::invalid_argument("membership_update: negative distance");

    const double p = (mode == ExponentMode::standard) ? 2.0 / (m - 1.0) : m / (m - 1.0);
    FuzzyPartition out;
    out.c = static_cast<int>(c);
    out.memberships = Matrix(c, n, 0.0);
    for (std::size_t kcol = 0; kcol < n; ++kcol) {
        std::size_t zero = c;
        for (std::size_t i = 0; i < c; ++i) {
            if (distances(i, kcol) == 0.0) {
                zero = i;
                break;
            }
        }
        if (zero < c) {
            out.memberships(zero, kcol) = 1.0;
            continue;
        }
        for (std::size_t i = 0; i < c; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j)
                s += std::pow(distances(i, kcol) / distances(j, kcol), p);
            out.memberships(i, kcol) = 1.0 / s;
        }
    }
    return out;
}

Matrix centers_update(const Dataset& data, const FuzzyPartition& u, double m,
                      const Matrix* previous) {
    if (m <= 1.0) throw std::invalid_argument("centers_update: weighting exponent must exceed 1");
    const std::size_t c = static_cast<std::size_t>(u.c), n = data.size(), dim = data.dim();
    if (u.size() != n) throw std::invalid_argument("centers_update: shape mismatch");
    if (previous && (previous->rows() != c || previous->cols() != dim))
        throw std::invalid_argument("centers_update: previous centers shape mismatch");

    Matrix v(c, dim, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        double mass = 0.0;
        for (std::size_t kcol = 0; kcol < n; ++kcol) {
            const double w = std::pow(u.memberships(i, kcol), m);
            mass += w;
            for (std::size_t j = 0; j < dim; ++j) v(i, j) += w * data.points(kcol, j);
        }
        if (mass > 0.0) {
            for (std::size_t j = 0; j < dim; ++j) v(i, j) /= mass;
        } else if (previous) {
            for (std::size_t j = 0; j < dim; ++j) v(i, j) = (*previous)(i, j);
        } else {
            for (std::size_t j = 0; j < dim; ++j) v(i, j) = 0.0;
        }
    }
    return v;
}

namespace {

double default_cov_reg(const Dataset& data) {
    const std::size_t n = data.size(), dim = data.dim();
    double trace = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.points(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = data.points(i, j) - mean;
            var += d * d;
        }
        trace += var / static_cast<double>(n);
    }
    const double reg = 1e-6 * trace / static_cast<double>(dim);
    return reg > 0.0 ? reg : 1e-12;
}

}  // namespace

SoftDbscanOutput soft_dbscan(const Dataset& data, const SoftDbscanConfig& cfg,
                             std::vector<Matrix>* u_trace) {
    data.validate();
    cfg.validate();
    if (cfg.m <= 2.0)
        std::cerr << "soft_dbscan: warning: weighting exponent m = " << cfg.m << " is <= 2\n";
    const std::size_t n = data.size(), dim = data.dim();

    const DbscanResult seed = dbscan(data, cfg.eps, cfg.min_pts);
    const std::size_t k = static_cast<std::size_t>(seed.k);
    const std::size_t x = seed.noise_ids.size();
    const std::size_t c = k + x;
    if (c == 0) throw std::runtime_error("soft_dbscan: seeding produced no clusters");
    if (c > n)
        std::cerr << "soft_dbscan: warning: " << c << " clusters for " << n << " points\n";

    // crisp seed partition; each noise point opens its own singleton cluster
    FuzzyPartition u;
    u.c = static_cast<int>(c);
    u.memberships = Matrix(c, n, 0.0);
    std::vector<int> noise_seeded;
    for (std::size_t i = 0; i < n; ++i)
        if (seed.assignment[i] != kNoiseLabel)
            u.memberships(static_cast<std::size_t>(seed.assignment[i]), i) = 1.0;
    for (std::size_t s = 0; s < x; ++s) {
        u.memberships(k + s, seed.noise_ids[s]) = 1.0;
        noise_seeded.push_back(static_cast<int>(k + s));
    }

    const double reg = cfg.cov_reg ? *cfg.cov_reg : default_cov_reg(data);
    Matrix centers = centers_update(data, u, cfg.m);
    Matrix dist(c, n, 0.0);
    int iterations = 0;
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        const std::vector<Matrix> inv = fuzzy_covariance(data, u, centers, cfg.m, reg);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t kcol = 0; kcol < n; ++kcol)
                dist(i, kcol) = mahalanobis(data.points.row(kcol), centers.row(i), inv[i]);
        FuzzyPartition next = membership_update(dist, cfg.m, cfg.exponent_mode);
        centers = centers_update(data, next, cfg.m, &centers);
        double delta = 0.0;
        for (std::size_t i = 0; i < u.memberships.data().size(); ++i)
            delta = std::max(delta,
                             std::abs(next.memberships.data()[i] - u.memberships.data()[i]));
        u = std::move(next);
        iterations = iter;
        if (u_trace) u_trace->push_back(u.memberships);
        if (delta <= cfg.xi) break;
    }

    SoftDbscanOutput out;
    out.memberships = std::move(u);
    out.centers = std::move(centers);
    out.noise_seeded = std::move(noise_seeded);
    out.iterations = iterations;
    const Partition hard = harden(out.memberships);
    for (std::size_t i = 0; i < n; ++i)
        if (static_cast<std::size_t>(hard.assignment[i]) >= k) out.noisy_points.push_back(i);
    return out;
}

MaintainedDataset maintain(const Dataset& data, const SoftDbscanConfig& cfg, double dedup_radius) {
    if (dedup_radius < 0.0) throw std::invalid_argument("maintain: dedup radius must be non-negative");
    const SoftDbscanOutput soft = soft_dbscan(data, cfg);
    const Partition hard = harden(soft.memberships);
    const std::size_t n = data.size();

    std::vector<char> noisy(n, 0);
    for (std::size_t i : soft.noisy_points) noisy[i] = 1;

    MaintainedDataset out;
    std::vector<std::vector<std::size_t>> kept_by_cluster(static_cast<std::size_t>(hard.k));
    const double r2 = dedup_radius * dedup_radius;
    for (std::size_t i = 0; i < n; ++i) {
        if (noisy[i]) {
            out.removed_noisy.push_back(i);
            continue;
        }
        const std::size_t cl = static_cast<std::size_t>(hard.assignment[i]);
        bool redundant = false;
        for (std::size_t j : kept_by_cluster[cl]) {
            if (squared_distance(data.points.row(i), data.points.row(j)) <= r2) {
                redundant = true;
                break;
            }
        }
        if (redundant) {
            out.removed_redundant.push_back(i);
        } else {
            kept_by_cluster[cl].push_back(i);
            out.kept.push_back(i);
        }
    }
    if (out.kept.empty()) throw std::runtime_error("maintain: every point was removed");

    out.reduced.points = Matrix(out.kept.size(), data.dim());
    out.reduced.ids.reserve(out.kept.size());
    std::vector<int> labels;
    for (std::size_t r = 0; r < out.kept.size(); ++r) {
        const std::size_t i = out.kept[r];
        for (std::size_t j = 0; j < data.dim(); ++j) out.reduced.points(r, j) = data.points(i, j);
        out.reduced.ids.push_back(data.ids[i]);
        if (data.labels) labels.push_back((*data.labels)[i]);
    }
    if (data.labels) out.reduced.labels = std::move(labels);
    return out;
}

}  // namespace rcfm
