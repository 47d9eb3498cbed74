#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rcfm/clustering.hpp"
#include "rcfm/harness.hpp"
#include "rcfm/random.hpp"
#include "test_util.hpp"

using namespace rcfm;
using test_util::make_dataset;

namespace {

/// Reference DBSCAN built directly from the density-reachability definition:
/// core points are eps-adjacent components (ordered by their smallest core
/// index), border points join the lowest-ordered component that reaches them.
DbscanResult dbscan_reference(const Dataset& data, double eps, int min_pts) {
    const std::size_t n = data.size();
    const double eps2 = eps * eps;
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            adj[i][j] = squared_distance(data.points.row(i), data.points.row(j)) <= eps2;

    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) count += adj[i][j];
        core[i] = count >= min_pts;
    }

    // components of core points under eps-adjacency, in index order
    std::vector<int> label(n, kNoiseLabel);
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || label[i] != kNoiseLabel) continue;
        const int cid = k++;
        std::vector<std::size_t> stack{i};
        label[i] = cid;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                if (!adj[u][v] || !core[v] || label[v] != kNoiseLabel) continue;
                label[v] = cid;
                stack.push_back(v);
            }
        }
    }
    // border points: lowest-ordered reaching component
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i] || label[i] != kNoiseLabel) continue;
        int best = -1;
        for (std::size_t j = 0; j < n; ++j)
            if (adj[i][j] && core[j] && (best == -1 || label[j] < best)) best = label[j];
        label[i] = best == -1 ? kNoiseLabel : best;
    }

    DbscanResult out;
    out.assignment = std::move(label);
    out.k = k;
    for (std::size_t i = 0; i < n; ++i)
        if (out.assignment[i] == kNoiseLabel) out.noise_ids.push_back(i);
    return out;
}

bool same_up_to_relabel(const DbscanResult& a, const DbscanResult& b) {
    if (a.k != b.k || a.noise_ids != b.noise_ids) return false;
    std::vector<int> map(static_cast<std::size_t>(a.k), -1);
    std::vector<char> hit(static_cast<std::size_t>(b.k), 0);
    for (std::size_t i = 0; i < a.assignment.size(); ++i) {
        const int la = a.assignment[i], lb = b.assignment[i];
        if ((la == kNoiseLabel) != (lb == kNoiseLabel)) return false;
        if (la == kNoiseLabel) continue;
        if (map[static_cast<std::size_t>(la)] == -1) {
            if (hit[static_cast<std::size_t>(lb)]) return false;
            map[static_cast<std::size_t>(la)] = lb;
            hit[static_cast<std::size_t>(lb)] = 1;
        } else if (map[static_cast<std::size_t>(la)] != lb) {
            return false;
        }
    }
    return true;
}

double kmeans_cost(const Dataset& data, const std::vector<int>& assign, int k) {
    const std::size_t dim = data.dim();
    Matrix centers(static_cast<std::size_t>(k), dim, 0.0);
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        counts[static_cast<std::size_t>(assign[i])] += 1.0;
        for (std::size_t j = 0; j < dim; ++j)
            centers(static_cast<std::size_t>(assign[i]), j) += data.points(i, j);
    }
    for (int c = 0; c < k; ++c)
        for (std::size_t j = 0; j < dim; ++j)
            if (counts[static_cast<std::size_t>(c)] > 0)
                centers(static_cast<std::size_t>(c), j) /= counts[static_cast<std::size_t>(c)];
    double cost = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        cost += squared_distance(data.points.row(i),
                                 centers.row(static_cast<std::size_t>(assign[i])));
    return cost;
}

}  // namespace

TEST_CASE("kmeans k=1 returns the coordinate-wise mean") {
    const Dataset d = make_dataset({{0, 0}, {2, 4}, {4, 2}});
    std::vector<double> trace;
    const Partition p = kmeans(d, 1, 7, 100, 1e-8, &trace);
    CHECK(p.k == 1);
    CHECK(std::all_of(p.assignment.begin(), p.assignment.end(), [](int a) { return a == 0; }));
    // cost equals scatter around the mean (2,2)
    CHECK(trace.back() == doctest::Approx(kmeans_cost(d, p.assignment, 1)));
}

TEST_CASE("kmeans k=N gives singletons with zero cost") {
    const Dataset d = make_dataset({{0, 0}, {5, 0}, {0, 5}, {5, 5}});
    const Partition p = kmeans(d, 4, 3);
    std::set<int> used(p.assignment.begin(), p.assignment.end());
    CHECK(used.size() == 4);
    CHECK(kmeans_cost(d, p.assignment, 4) == doctest::Approx(0.0));
}

TEST_CASE("kmeans separates two blobs and no single move improves the cost") {
    const Dataset d = synth_blobs(40, 2, 2, 0.5, 14.14, 0.0, 0.0, 42);
    const Partition p = kmeans(d, 2, 11);
    CHECK(clustering_accuracy(p, *d.labels) == doctest::Approx(1.0));

    const double base = kmeans_cost(d, p.assignment, 2);
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<int> moved = p.assignment;
        moved[i] = 1 - moved[i];
        CHECK(kmeans_cost(d, moved, 2) >= base - 1e-9);
    }
}

TEST_CASE("kmeans objective is non-increasing and runs are deterministic") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset d = synth_blobs(60, 3, 3, 1.5, 4.0, 0.0, 0.0, 100 + trial);
        std::vector<double> trace;
        const Partition p = kmeans(d, 3, trial, 100, 1e-8, &trace);
        for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-9);
        const Partition q = kmeans(d, 3, trial);
        CHECK(p.assignment == q.assignment);
    }
}

TEST_CASE("kmeans input validation") {
    const Dataset d = make_dataset({{0, 0}, {1, 1}});
    CHECK_THROWS_AS(kmeans(d, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(d, 3, 1), std::invalid_argument);
    Dataset bad = d;
    bad.points(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(kmeans(bad, 1, 1), std::invalid_argument);
}

TEST_CASE("pam picks the middle medoid for k=1 on {0,1,10}") {
    // brute force: medoid 0 costs 11, medoid 1 costs 10, medoid 10 costs 19
    const Dataset d = make_dataset({{0}, {1}, {10}});
    std::vector<std::size_t> medoids;
    const Partition p = pam(d, 1, 1, 100, &medoids);
    CHECK(p.k == 1);
    CHECK(medoids == std::vector<std::size_t>{1});
    CHECK(std::all_of(p.assignment.begin(), p.assignment.end(), [](int a) { return a == 0; }));
}

TEST_CASE("pam k=N costs zero") {
    const Dataset d = make_dataset({{0}, {3}, {9}});
    const Partition p = pam(d, 3, 1);
    std::set<int> used(p.assignment.begin(), p.assignment.end());
    CHECK(used.size() == 3);
}

TEST_CASE("pam matches brute force on a line") {
    const Dataset d = make_dataset({{0}, {1}, {2}, {10}, {11}});
    std::vector<std::size_t> medoids;
    const Partition p = pam(d, 2, 1, 100, &medoids);
    // brute force over all 10 medoid pairs says {0,1,2} and {10,11}
    CHECK(p.assignment[0] == p.assignment[1]);
    CHECK(p.assignment[1] == p.assignment[2]);
    CHECK(p.assignment[3] == p.assignment[4]);
    CHECK(p.assignment[0] != p.assignment[3]);

    // exhaustive verification that the PAM medoid pair attains the optimum
    auto pair_cost = [&](std::size_t a, std::size_t b) {
        double c = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j)
            c += std::min(std::abs(d.points(j, 0) - d.points(a, 0)),
                          std::abs(d.points(j, 0) - d.points(b, 0)));
        return c;
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < d.size(); ++a)
        for (std::size_t b = a + 1; b < d.size(); ++b) best = std::min(best, pair_cost(a, b));
    REQUIRE(medoids.size() == 2);
    CHECK(pair_cost(medoids[0], medoids[1]) == doctest::Approx(best));
}

TEST_CASE("pam is deterministic and validates input") {
    const Dataset d = synth_blobs(30, 2, 2, 0.8, 6.0, 0.0, 0.0, 8);
    CHECK(pam(d, 2, 1).assignment == pam(d, 99, 1).assignment);
    CHECK_THROWS_AS(pam(d, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(pam(d, 31, 1), std::invalid_argument);
}

TEST_CASE("fuzzy memberships at equal distances are 0.5") {
    // two centers symmetric around the midpoint; the middle point must split
    const Dataset d = make_dataset({{0}, {2}, {1}});
    const FuzzyPartition u = fuzzy_cmeans(d, 2, 2.0, 1e-9, 4, 300);
    // locate the column of the midpoint (index 2)
    CHECK(u.memberships(0, 2) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(u.memberships(1, 2) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("fuzzy point coincident with a center takes full membership") {
    // with c = N every initial center sits exactly on a data row, so the
    // zero-distance rule pins each point to its own cluster
    const Dataset d = make_dataset({{0}, {10}});
    const FuzzyPartition u = fuzzy_cmeans(d, 2, 2.0, 1e-9, 1, 300);
    for (std::size_t col = 0; col < d.size(); ++col) {
        double mx = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            mx = std::max(mx, u.memberships(i, col));
            sum += u.memberships(i, col);
        }
        CHECK(mx == doctest::Approx(1.0));
        CHECK(sum == doctest::Approx(1.0));
    }
}

TEST_CASE("fuzzy membership update follows the 2/(m-1) exponent") {
    // crisp start: cluster 0 = {0, 1}, cluster 1 = {3}; the first sweep puts
    // the centers at exactly 0.5 and 3, so the probe at 1 sees distances
    // (0.5, 2) and with m = 3 the update gives 1/(1 + 0.5/2) = 0.8
    FuzzyPartition u0;
    u0.c = 2;
    u0.memberships = Matrix(2, 3, 0.0);
    u0.memberships(0, 0) = 1.0;
    u0.memberships(1, 1) = 1.0;
    u0.memberships(0, 2) = 1.0;
    const Dataset d = make_dataset({{0.0}, {3.0}, {1.0}});
    FcmTrace trace;
    fuzzy_cmeans_from(d, u0, 3.0, 1e-12, 1, &trace);
    CHECK(trace.memberships[0](0, 2) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(trace.memberships[0](1, 2) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("fuzzy column sums stay at 1 and the objective never increases") {
    for (int trial = 0; trial < 8; ++trial) {
        const Dataset d = synth_blobs(40, 3, 2, 1.0, 3.0, 0.0, 0.0, 500 + trial);
        FcmTrace trace;
        const FuzzyPartition u = fuzzy_cmeans(d, 3, 2.0, 1e-6, trial, 200, &trace);
        u.validate(1e-9);
        for (const Matrix& step : trace.memberships) {
            for (std::size_t col = 0; col < step.cols(); ++col) {
                double sum = 0.0;
                for (std::size_t i = 0; i < step.rows(); ++i) sum += step(i, col);
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
        for (std::size_t t = 1; t < trace.objective.size(); ++t)
            CHECK(trace.objective[t] <= trace.objective[t - 1] + 1e-9);
    }
}

TEST_CASE("fuzzy_cmeans validates parameters") {
    const Dataset d = make_dataset({{0}, {1}});
    CHECK_THROWS_AS(fuzzy_cmeans(d, 2, 1.0, 1e-6, 1, 100), std::invalid_argument);
    CHECK_THROWS_AS(fuzzy_cmeans(d, 0, 2.0, 1e-6, 1, 100), std::invalid_argument);
    CHECK_THROWS_AS(fuzzy_cmeans(d, 3, 2.0, 1e-6, 1, 100), std::invalid_argument);
}

TEST_CASE("dbscan leaves an isolated point as noise") {
    const Dataset d = make_dataset({{0, 0}, {100, 100}, {0.1, 0}, {0, 0.1}, {0.1, 0.1}});
    const DbscanResult r = dbscan(d, 0.5, 2);
    CHECK(std::find(r.noise_ids.begin(), r.noise_ids.end(), 1u) != r.noise_ids.end());
}

TEST_CASE("dbscan on identical points forms one cluster") {
    const Dataset d = make_dataset({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
    const DbscanResult r = dbscan(d, 0.5, 4);
    CHECK(r.k == 1);
    CHECK(r.noise_ids.empty());
}

TEST_CASE("dbscan finds two blobs and flags the outliers") {
    // blobs at distance 10 with sigma 0.2, three far outliers appended
    Dataset d = synth_blobs(60, 2, 2, 0.2, 10.0, 0.0, 0.0, 321);
    const std::size_t base = d.size();
    Matrix grown(base + 3, 2);
    for (std::size_t i = 0; i < base; ++i)
        for (std::size_t j = 0; j < 2; ++j) grown(i, j) = d.points(i, j);
    const double far[3][2] = {{200, 200}, {-200, 150}, {180, -170}};
    for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t j = 0; j < 2; ++j) grown(base + o, j) = far[o][j];
    d.points = std::move(grown);
    d.labels.reset();
    for (std::size_t o = 0; o < 3; ++o) d.ids.push_back("far" + std::to_string(o));

    const DbscanResult r = dbscan(d, 1.0, 4);
    CHECK(r.k == 2);
    CHECK(r.noise_ids == std::vector<std::size_t>{base, base + 1, base + 2});
    CHECK(same_up_to_relabel(r, dbscan_reference(d, 1.0, 4)));
}

TEST_CASE("dbscan matches the reference implementation on random data") {
    Rng rng(777);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 20 + rng.index(60);
        const std::size_t dim = 1 + rng.index(3);
        Dataset d;
        d.points = Matrix(n, dim);
        for (double& v : d.points.data()) v = rng.uniform(0.0, 10.0);
        for (std::size_t i = 0; i < n; ++i) d.ids.push_back(std::to_string(i));
        const double eps = 0.5 + rng.uniform() * 2.0;
        const int min_pts = 2 + static_cast<int>(rng.index(4));
        CHECK(same_up_to_relabel(dbscan(d, eps, min_pts), dbscan_reference(d, eps, min_pts)));
    }
}

TEST_CASE("dbscan is permutation-invariant on separated data") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset d = synth_blobs(50, 3, 2, 0.3, 8.0, 0.1, 0.0, 900 + trial);
        const DbscanResult r = dbscan(d, 1.0, 4);

        std::vector<std::size_t> perm(d.size());
        std::iota(perm.begin(), perm.end(), 0u);
        for (std::size_t i = perm.size(); i-- > 1;) std::swap(perm[i], perm[rng.index(i + 1)]);
        Dataset shuffled;
        shuffled.points = Matrix(d.size(), d.dim());
        for (std::size_t i = 0; i < d.size(); ++i) {
            for (std::size_t j = 0; j < d.dim(); ++j)
                shuffled.points(i, j) = d.points(perm[i], j);
            shuffled.ids.push_back(d.ids[perm[i]]);
        }
        const DbscanResult rs = dbscan(shuffled, 1.0, 4);

        CHECK(r.k == rs.k);
        // noise must be the same set of points
        std::set<std::string> noise_a, noise_b;
        for (std::size_t i : r.noise_ids) noise_a.insert(d.ids[i]);
        for (std::size_t i : rs.noise_ids) noise_b.insert(shuffled.ids[i]);
        CHECK(noise_a == noise_b);
        // clusters must agree up to relabeling
        std::vector<int> map(static_cast<std::size_t>(r.k), -1);
        bool consistent = true;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const int a = r.assignment[perm[i]];
            const int b = rs.assignment[i];
            if ((a == kNoiseLabel) != (b == kNoiseLabel)) consistent = false;
            if (a == kNoiseLabel || !consistent) continue;
            if (map[static_cast<std::size_t>(a)] == -1) map[static_cast<std::size_t>(a)] = b;
            else if (map[static_cast<std::size_t>(a)] != b) consistent = false;
        }
        CHECK(consistent);
    }
}

TEST_CASE("dbscan validates parameters") {
    const Dataset d = make_dataset({{0}, {1}});
    CHECK_THROWS_AS(dbscan(d, 0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(dbscan(d, 1.0, 0), std::invalid_argument);
}
