#include "rcfm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rcfm/random.hpp"

namespace rcfm {

namespace {

void check_common(const Dataset& data, int k, const char* who) {
    data.validate();
    if (k <= 0) throw std::invalid_argument(std::string(who) + ": cluster count must be positive");
    if (static_cast<std::size_t>(k) > data.size())
        throw std::invalid_argument(std::string(who) + ": cluster count exceeds dataset size");
}

/// k distinct row indices drawn without replacement.
std::vector<std::size_t> sample_rows(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

Matrix centers_from_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
    Matrix c(rows.size(), data.dim());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < data.dim(); ++j) c(i, j) = data.points(rows[i], j);
    return c;
}

/// Memberships from a matrix of point-to-center squared distances using the
/// exponent 1/(m-1) on squared distances (equivalently 2/(m-1) on distances).
/// A zero distance wins the whole column, lowest index first.
void fcm_memberships(const Matrix& sqdist, double m, Matrix& u) {
    const std::size_t c = sqdist.rows(), n = sqdist.cols();
    const double p = 1.0 / (m - 1.0);
    for (std::size_t kcol = 0; kcol < n; ++kcol) {
        std::size_t zero = c;
        for (std::size_t i = 0; i < c; ++i) {
            if (sqdist(i, kcol) == 0.0) {
                zero = i;
                break;
            }
        }
        if (zero < c) {
            for (std::size_t i = 0; i < c; ++i) u(i, kcol) = (i == zero) ? 1.0 : 0.0;
            continue;
        }
        for (std::size_t i = 0; i < c; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += std::pow(sqdist(i, kcol) / sqdist(j, kcol), p);
            u(i, kcol) = 1.0 / s;
        }
    }
}

Matrix fcm_centers(const Dataset& data, const Matrix& u, double m, const Matrix& fallback) {
    const std::size_t c = u.rows(), dim = data.dim();
    Matrix v(c, dim, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        double mass = 0.0;
        for (std::size_t kcol = 0; kcol < data.size(); ++kcol) {
            const double w = std::pow(u(i, kcol), m);
            mass += w;
            for (std::size_t j = 0; j < dim; ++j) v(i, j) += w * data.points(kcol, j);
        }
        if (mass > 0.0) {
            for (std::size_t j = 0; j < dim; ++j) v(i, j) /= mass;
        } else {
            for (std::size_t j = 0; j < dim; ++j) v(i, j) = fallback(i, j);
        }
    }
    return v;
}

void point_center_sqdist(const Dataset& data, const Matrix& centers, Matrix& out) {
    for (std::size_t i = 0; i < centers.rows(); ++i)
        for (std::size_t kcol = 0; kcol < data.size(); ++kcol)
            out(i, kcol) = squared_distance(centers.row(i), data.points.row(kcol));
}

double fcm_objective(const Matrix& sqdist, const Matrix& u, double m) {
    double j = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i)
        for (std::size_t kcol = 0; kcol < u.cols(); ++kcol)
            j += std::pow(u(i, kcol), m) * sqdist(i, kcol);
    return j;
}

}  // namespace

Partition kmeans(const Dataset& data, int k, std::uint64_t seed, int max_iter, double tol,
                 std::vector<double>* objective_trace) {
    check_common(data, k, "kmeans");
    if (tol <= 0.0) throw std::invalid_argument("kmeans: tol must be positive");
    const std::size_t n = data.size(), dim = data.dim(), kk = static_cast<std::size_t>(k);

    Rng rng(seed);
    Matrix centers = centers_from_rows(data, sample_rows(n, kk, rng));
    std::vector<int> assign(n, 0);
    std::vector<std::size_t> counts(kk, 0);

    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step
        std::fill(counts.begin(), counts.end(), 0u);
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = squared_distance(data.points.row(i), centers.row(0));
            for (std::size_t c = 1; c < kk; ++c) {
                const double d = squared_distance(data.points.row(i), centers.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = static_cast<int>(best);
            ++counts[best];
            objective += best_d;
        }
        if (objective_trace) objective_trace->push_back(objective);

        // re-seed any empty cluster at the farthest point of a cluster that
        // can spare one
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far_i = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t owner = static_cast<std::size_t>(assign[i]);
                if (counts[owner] < 2) continue;
                const double d = squared_distance(data.points.row(i), centers.row(owner));
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            if (far_i == n) throw std::runtime_error("kmeans: cannot repopulate empty cluster");
            --counts[static_cast<std::size_t>(assign[far_i])];
            assign[far_i] = static_cast<int>(c);
            ++counts[c];
            for (std::size_t j = 0; j < dim; ++j) centers(c, j) = data.points(far_i, j);
        }

        // update step
        Matrix next(kk, dim, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                next(static_cast<std::size_t>(assign[i]), j) += data.points(i, j);
        double shift = 0.0;
        for (std::size_t c = 0; c < kk; ++c) {
            for (std::size_t j = 0; j < dim; ++j) next(c, j) /= static_cast<double>(counts[c]);
            shift = std::max(shift, euclidean_distance(next.row(c), centers.row(c)));
        }
        centers = std::move(next);
        if (shift < tol) break;
    }

    Partition out{assign, k};
    out.validate();
    return out;
}

Partition pam(const Dataset& data, int k, std::uint64_t seed, int max_iter,
              std::vector<std::size_t>* medoids_out) {
    check_common(data, k, "pam");
    (void)seed;
    const std::size_t n = data.size(), kk = static_cast<std::size_t>(k);

    Matrix dist(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dist(i, j) = dist(j, i) = euclidean_distance(data.points.row(i), data.points.row(j));

    std::vector<std::size_t> medoids;
    std::vector<char> is_medoid(n, 0);

    // BUILD: first the row with minimum total distance, then greedily the
    // candidate with the largest cost reduction.
    {
        std::size_t best = 0;
        double best_sum = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += dist(i, j);
            if (s < best_sum) {
                best_sum = s;
                best = i;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = 1;
    }
    std::vector<double> nearest(n);
    auto refresh_nearest = [&] {
        for (std::size_t j = 0; j < n; ++j) {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t m : medoids) d = std::min(d, dist(m, j));
            nearest[j] = d;
        }
    };
    refresh_nearest();
    while (medoids.size() < kk) {
        std::size_t best = n;
        double best_gain = -1.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (is_medoid[c]) continue;
            double gain = 0.0;
            for (std::size_t j = 0; j < n; ++j) gain += std::max(0.0, nearest[j] - dist(c, j));
            if (gain > best_gain) {
                best_gain = gain;
                best = c;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = 1;
        refresh_nearest();
    }

    auto total_cost = [&](const std::vector<std::size_t>& meds) {
        double cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t m : meds) d = std::min(d, dist(m, j));
            cost += d;
        }
        return cost;
    };

    // SWAP: take the single best-improving (medoid, candidate) exchange until
    // none improves.
    double cost = total_cost(medoids);
    for (int iter = 0; iter < max_iter; ++iter) {
        double best_cost = cost;
        std::size_t best_m = kk, best_h = n;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                std::vector<std::size_t> trial = medoids;
                trial[mi] = h;
                const double c = total_cost(trial);
                if (c < best_cost - 1e-12) {
                    best_cost = c;
                    best_m = mi;
                    best_h = h;
                }
            }
        }
        if (best_m == kk) break;
        is_medoid[medoids[best_m]] = 0;
        medoids[best_m] = best_h;
        is_medoid[best_h] = 1;
        cost = best_cost;
    }

    std::sort(medoids.begin(), medoids.end());
    if (medoids_out) *medoids_out = medoids;
    Partition out;
    out.k = k;
    out.assignment.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t best = 0;
        for (std::size_t mi = 1; mi < medoids.size(); ++mi)
            if (dist(medoids[mi], j) < dist(medoids[best], j)) best = mi;
        out.assignment[j] = static_cast<int>(best);
    }
    out.validate();
    return out;
}

FuzzyPartition fuzzy_cmeans_from(const Dataset& data, const FuzzyPartition& u0, double m,
                                 double tol, int max_iter, FcmTrace* trace) {
    if (m <= 1.0) throw std::invalid_argument("fuzzy_cmeans: weighting exponent must exceed 1");
    if (tol <= 0.0) throw std::invalid_argument("fuzzy_cmeans: tol must be positive");
    u0.validate();
    const std::size_t c = static_cast<std::size_t>(u0.c), n = data.size();
    if (u0.size() != n) throw std::invalid_argument("fuzzy_cmeans: membership width mismatch");

    Matrix u = u0.memberships;
    Matrix centers(c, data.dim(), 0.0);
    Matrix sqdist(c, n, 0.0);
    for (int iter = 0; iter < max_iter; ++iter) {
        centers = fcm_centers(data, u, m, centers);
        point_center_sqdist(data, centers, sqdist);
        Matrix next(c, n, 0.0);
        fcm_memberships(sqdist, m, next);
        double delta = 0.0;
        for (std::size_t i = 0; i < u.data().size(); ++i)
            delta = std::max(delta, std::abs(next.data()[i] - u.data()[i]));
        u = std::move(next);
        if (trace) {
            trace->memberships.push_back(u);
            trace->objective.push_back(fcm_objective(sqdist, u, m));
        }
        if (delta <= tol) break;
    }
    FuzzyPartition out{std::move(u), static_cast<int>(c)};
    out.validate();
    return out;
}

FuzzyPartition fuzzy_cmeans(const Dataset& data, int c, double m, double tol, std::uint64_t seed,
                            int max_iter, FcmTrace* trace) {
    check_common(data, c, "fuzzy_cmeans");
    if (m <= 1.0) throw std::invalid_argument("fuzzy_cmeans: weighting exponent must exceed 1");
    if (tol <= 0.0) throw std::invalid_argument("fuzzy_cmeans: tol must be positive");
    const std::size_t cc = static_cast<std::size_t>(c), n = data.size();

    Rng rng(seed);
    const Matrix centers = centers_from_rows(data, sample_rows(n, cc, rng));
    Matrix sqdist(cc, n, 0.0);
    point_center_sqdist(data, centers, sqdist);
    FuzzyPartition u0;
    u0.c = c;
    u0.memberships = Matrix(cc, n, 0.0);
    fcm_memberships(sqdist, m, u0.memberships);
    if (trace) {
        trace->memberships.push_back(u0.memberships);
        trace->objective.push_back(fcm_objective(sqdist, u0.memberships, m));
    }
    return fuzzy_cmeans_from(data, u0, m, tol, max_iter, trace);
}

DbscanResult dbscan(const Dataset& data, double eps, int min_pts) {
    data.validate();
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be at least 1");
    const std::size_t n = data.size();
    const double eps2 = eps * eps;

    // eps-neighborhoods, the point itself included
    std::vector<std::vector<std::size_t>> neigh(n);
    for (std::size_t i = 0; i < n; ++i) {
        neigh[i].push_back(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (squared_distance(data.points.row(i), data.points.row(j)) <= eps2) {
                neigh[i].push_back(j);
                neigh[j].push_back(i);
            }
        }
    }

    constexpr int kUnvisited = -2;
    std::vector<int> label(n, kUnvisited);
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        if (neigh[i].size() < static_cast<std::size_t>(min_pts)) {
            label[i] = kNoiseLabel;
            continue;
        }
        const int cid = k++;
        label[i] = cid;
        std::deque<std::size_t> frontier(neigh[i].begin(), neigh[i].end());
        while (!frontier.empty()) {
            const std::size_t j = frontier.front();
            frontier.pop_front();
            if (label[j] == kNoiseLabel) label[j] = cid;  // noise becomes a border point
            if (label[j] != kUnvisited) continue;
            label[j] = cid;
            if (neigh[j].size() >= static_cast<std::size_t>(min_pts))
                frontier.insert(frontier.end(), neigh[j].begin(), neigh[j].end());
        }
    }

    DbscanResult out;
    out.assignment = std::move(label);
    out.k = k;
    for (std::size_t i = 0; i < n; ++i)
        if (out.assignment[i] == kNoiseLabel) out.noise_ids.push_back(i);
    return out;
}

}  // namespace rcfm
