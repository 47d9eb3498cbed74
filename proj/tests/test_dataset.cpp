#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "rcfm/dataset.hpp"
#include "rcfm/random.hpp"
#include "test_util.hpp"

using namespace rcfm;
using test_util::make_partition;
using test_util::temp_path;
using test_util::write_text;

namespace {

/// Oracle: best diagonal agreement over every label permutation of p.
std::size_t best_permutation_agreement(const Partition& p, const Partition& ref) {
    std::vector<int> perm(static_cast<std::size_t>(p.k));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t agree = 0;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (perm[static_cast<std::size_t>(p.assignment[i])] == ref.assignment[i]) ++agree;
        best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Oracle: best matched count over every injective cluster-to-class map,
/// by brute force over class permutations on the padded square problem.
double brute_force_accuracy(const Partition& pred, const std::vector<int>& truth) {
    int n_classes = 0;
    for (int t : truth) n_classes = std::max(n_classes, t + 1);
    const int side = std::max(pred.k, n_classes);
    std::vector<int> perm(static_cast<std::size_t>(side));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t matched = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (perm[static_cast<std::size_t>(pred.assignment[i])] == truth[i]) ++matched;
        best = std::max(best, matched);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(pred.size());
}

Partition random_partition(Rng& rng, std::size_t n, int k) {
    Partition p;
    p.k = k;
    p.assignment.resize(n);
    // guarantee every cluster appears
    for (int c = 0; c < k; ++c) p.assignment[static_cast<std::size_t>(c)] = c;
    for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i)
        p.assignment[i] = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    for (std::size_t i = n; i-- > 1;) std::swap(p.assignment[i], p.assignment[rng.index(i + 1)]);
    return p;
}

}  // namespace

TEST_CASE("load_csv parses features without labels") {
    const std::string path = temp_path("plain.csv");
    write_text(path, "a,b\n1.5,2\n-0.25,4\n3,5\n");
    const Dataset d = load_csv(path);
    CHECK(d.size() == 3);
    CHECK(d.dim() == 2);
    CHECK_FALSE(d.labels.has_value());
    CHECK(d.points(0, 0) == doctest::Approx(1.5));
    CHECK(d.points(2, 1) == doctest::Approx(5.0));
}

TEST_CASE("load_csv header only is an error") {
    const std::string path = temp_path("header_only.csv");
    write_text(path, "a,b\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("empty dataset"),
                         std::invalid_argument);
}

TEST_CASE("load_csv reads id and label columns") {
    const std::string path = temp_path("labelled.csv");
    write_text(path, "id,x,y,label\nr0,0,0,0\nr1,1,0,0\nr2,0,1,1\nr3,1,1,1\n");
    const Dataset d = load_csv(path);
    CHECK(d.size() == 4);
    CHECK(d.dim() == 2);
    REQUIRE(d.labels.has_value());
    CHECK(*d.labels == std::vector<int>{0, 0, 1, 1});
    CHECK(d.ids[0] == "r0");
}

TEST_CASE("load_csv error paths") {
    CHECK_THROWS_AS(load_csv(temp_path("missing_file.csv")), std::invalid_argument);

    const std::string ragged = temp_path("ragged.csv");
    write_text(ragged, "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(load_csv(ragged), std::invalid_argument);

    const std::string bad_cell = temp_path("bad_cell.csv");
    write_text(bad_cell, "a,b\n1,apple\n");
    CHECK_THROWS_AS(load_csv(bad_cell), std::invalid_argument);

    const std::string dup = temp_path("dup_ids.csv");
    write_text(dup, "id,a\nx,1\nx,2\n");
    CHECK_THROWS_AS(load_csv(dup), std::invalid_argument);
}

TEST_CASE("csv round trip") {
    const std::vector<int> labels{0, 1, 0};
    Dataset d = test_util::make_dataset({{0.1, -2.5}, {1e-7, 3.25}, {7, 0.333333333333333}}, &labels);
    const std::string path = temp_path("round_trip.csv");
    write_csv(d, path);
    const Dataset back = load_csv(path);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.dim(); ++j) CHECK(back.points(i, j) == d.points(i, j));
    CHECK(*back.labels == labels);
}

TEST_CASE("contingency basics") {
    const Partition p = make_partition({0, 0, 1, 1}, 2);
    Matrix c = contingency(p, p);
    CHECK(c(0, 0) == 2.0);
    CHECK(c(1, 1) == 2.0);
    CHECK(c(0, 1) == 0.0);

    const Partition five = make_partition({0, 0, 0, 0, 0}, 1);
    c = contingency(five, five);
    CHECK(c.rows() == 1);
    CHECK(c(0, 0) == 5.0);

    const Partition a = make_partition({0, 0, 1, 1}, 2);
    const Partition b = make_partition({1, 1, 0, 0}, 2);
    c = contingency(a, b);
    CHECK(c(0, 0) == 0.0);
    CHECK(c(0, 1) == 2.0);
    CHECK(c(1, 0) == 2.0);
    CHECK(c(1, 1) == 0.0);

    CHECK_THROWS_AS(contingency(a, five), std::invalid_argument);
}

TEST_CASE("contingency entries always sum to N") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + rng.index(40);
        const int kp = 1 + static_cast<int>(rng.index(5));
        const int kq = 1 + static_cast<int>(rng.index(5));
        if (n < static_cast<std::size_t>(std::max(kp, kq))) continue;
        const Partition p = random_partition(rng, n, kp);
        const Partition q = random_partition(rng, n, kq);
        const Matrix c = contingency(p, q);
        double total = 0.0;
        for (double v : c.data()) total += v;
        CHECK(total == static_cast<double>(n));
    }
}

TEST_CASE("align_labels identity and swap") {
    const Partition ref = make_partition({0, 0, 1, 1, 2, 2}, 3);
    const Partition same = align_labels(ref, ref);
    CHECK(same.assignment == ref.assignment);
    CHECK(agreement(same, ref) == 6);

    Partition swapped = ref;
    for (int& a : swapped.assignment) a = (a == 0) ? 1 : (a == 1 ? 0 : a);
    const Partition fixed = align_labels(swapped, ref);
    CHECK(fixed.assignment == ref.assignment);
}

TEST_CASE("align_labels equals exhaustive permutation maximum") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const Partition p = random_partition(rng, 12, 3);
        const Partition ref = random_partition(rng, 12, 3);
        const Partition aligned = align_labels(p, ref);
        CHECK(agreement(aligned, ref) == best_permutation_agreement(p, ref));
    }
}

TEST_CASE("align_labels is idempotent") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Partition p = random_partition(rng, 15, 4);
        const Partition ref = random_partition(rng, 15, 4);
        const Partition once = align_labels(p, ref);
        const Partition twice = align_labels(once, ref);
        CHECK(once.assignment == twice.assignment);
    }
}

TEST_CASE("align_labels rejects mismatches") {
    const Partition p2 = make_partition({0, 1}, 2);
    const Partition p3 = make_partition({0, 1, 2}, 3);
    CHECK_THROWS_AS(align_labels(p2, p3), std::invalid_argument);
    const Partition q2 = make_partition({0, 1, 1}, 2);
    CHECK_THROWS_AS(align_labels(p2, q2), std::invalid_argument);
}

TEST_CASE("clustering_accuracy examples") {
    const Partition exact = make_partition({0, 1, 2, 0, 1, 2}, 3);
    CHECK(clustering_accuracy(exact, {0, 1, 2, 0, 1, 2}) == doctest::Approx(1.0));

    // permuted prediction labels keep perfect accuracy
    const Partition permuted = make_partition({2, 0, 1, 2, 0, 1}, 3);
    CHECK(clustering_accuracy(permuted, {0, 1, 2, 0, 1, 2}) == doctest::Approx(1.0));

    const Partition pred = make_partition({0, 0, 1, 1, 1}, 2);
    CHECK(clustering_accuracy(pred, {0, 1, 1, 1, 0}) == doctest::Approx(0.6));

    CHECK_THROWS_AS(clustering_accuracy(pred, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(clustering_accuracy(Partition{}, {}), std::invalid_argument);
}

TEST_CASE("clustering_accuracy equals brute force and is relabel-invariant") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 6 + rng.index(20);
        const int k = 2 + static_cast<int>(rng.index(3));
        const Partition pred = random_partition(rng, n, k);
        std::vector<int> truth(n);
        const int classes = 2 + static_cast<int>(rng.index(3));
        for (std::size_t i = 0; i < n; ++i)
            truth[i] = static_cast<int>(rng.index(static_cast<std::size_t>(classes)));
        const double acc = clustering_accuracy(pred, truth);
        CHECK(acc == doctest::Approx(brute_force_accuracy(pred, truth)));

        // relabel both sides with random permutations
        std::vector<int> pperm(static_cast<std::size_t>(k));
        std::iota(pperm.begin(), pperm.end(), 0);
        for (std::size_t i = pperm.size(); i-- > 1;) std::swap(pperm[i], pperm[rng.index(i + 1)]);
        std::vector<int> tperm(static_cast<std::size_t>(classes));
        std::iota(tperm.begin(), tperm.end(), 0);
        for (std::size_t i = tperm.size(); i-- > 1;) std::swap(tperm[i], tperm[rng.index(i + 1)]);
        Partition pred2 = pred;
        for (int& a : pred2.assignment) a = pperm[static_cast<std::size_t>(a)];
        std::vector<int> truth2 = truth;
        for (int& t : truth2) t = tperm[static_cast<std::size_t>(t)];
        CHECK(clustering_accuracy(pred2, truth2) == doctest::Approx(acc));
    }
}

TEST_CASE("harden breaks ties toward the lowest cluster") {
    FuzzyPartition fp;
    fp.c = 3;
    fp.memberships = Matrix(3, 2);
    fp.memberships(0, 0) = 0.4;
    fp.memberships(1, 0) = 0.4;
    fp.memberships(2, 0) = 0.2;
    fp.memberships(0, 1) = 0.1;
    fp.memberships(1, 1) = 0.3;
    fp.memberships(2, 1) = 0.6;
    const Partition p = harden(fp);
    CHECK(p.assignment[0] == 0);
    CHECK(p.assignment[1] == 2);
}

TEST_CASE("partition validation catches empty clusters") {
    CHECK_THROWS_AS(make_partition({0, 0, 2}, 3).validate(), std::invalid_argument);
    CHECK_NOTHROW(make_partition({0, 1, 2}, 3).validate());
}
