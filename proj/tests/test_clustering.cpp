#include <doctest.h>

#include <cmath>
#include <limits>

#include "crc/clustering.hpp"
#include "crc/error.hpp"
#include "crc/gradcheck.hpp"
#include "test_util.hpp"

using namespace crc;
using crc::test::random_tensor;

namespace {

// Lowest inertia over every assignment of m points to k labels.
double exhaustive_inertia(const Tensor& points, std::size_t k) {
    const std::size_t m = points.dim(0), n = points.dim(1);
    std::vector<std::size_t> label(m, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<std::size_t> count(k, 0);
        std::vector<double> sum(k * n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            ++count[label[i]];
            for (std::size_t j = 0; j < n; ++j) sum[label[i] * n + j] += points.at(i, j);
        }
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double d = points.at(i, j) - sum[label[i] * n + j] / static_cast<double>(count[label[i]]);
                total += d * d;
            }
        best = std::min(best, total);
        std::size_t pos = 0;
        while (pos < m && ++label[pos] == k) label[pos++] = 0;
        if (pos == m) break;
    }
    return best;
}

}  // namespace

TEST_CASE("kmeans oracles") {
    Rng rng(1);
    const Tensor pts = random_tensor({5, 2}, rng);
    const ClusterModel every = kmeans_fit(pts, 5, 3);
    CHECK(inertia(pts, every) == doctest::Approx(0.0));

    const ClusterModel one = kmeans_fit(pts, 1, 3);
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 5; ++i) mean += pts.at(i, j) / 5.0;
        CHECK(one.centers.at(0, j) == doctest::Approx(mean));
    }

    const Tensor line({4, 1}, {0, 1, 10, 11});
    const ClusterModel two = kmeans_fit(line, 2, 9);
    const double a = two.centers[0], b = two.centers[1];
    CHECK(std::min(a, b) == doctest::Approx(0.5));
    CHECK(std::max(a, b) == doctest::Approx(10.5));
    CHECK(inertia(line, two) == doctest::Approx(exhaustive_inertia(line, 2)));

    CHECK_THROWS_AS(kmeans_fit(pts, 6, 1), ConfigError);
    CHECK_THROWS_AS(kmeans_fit(pts, 0, 1), ConfigError);
}

TEST_CASE("kmeans reaches the exhaustive optimum on small sets") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t m = 3 + rng.below(6);  // 3..8
        const std::size_t k = 2 + rng.below(std::min<std::size_t>(3, m - 1));
        const Tensor pts = random_tensor({m, 2}, rng, -5.0, 5.0);
        const ClusterModel model = kmeans_fit(pts, k, 100 + trial);
        INFO("trial " << trial << " m " << m << " k " << k);
        CHECK(inertia(pts, model) == doctest::Approx(exhaustive_inertia(pts, k)).epsilon(1e-12));
    }
}

TEST_CASE("Lloyd inertia never increases") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor pts = random_tensor({60, 3}, rng);
        KMeansTrace trace;
        kmeans_fit(pts, 4, trial, {}, &trace);
        REQUIRE(!trace.inertia.empty());
        for (std::size_t i = 1; i < trace.inertia.size(); ++i)
            CHECK(trace.inertia[i] <= trace.inertia[i - 1] + 1e-12);
    }
}

TEST_CASE("kmeans is deterministic for a seed") {
    Rng rng(3);
    const Tensor pts = random_tensor({40, 3}, rng);
    CHECK(kmeans_fit(pts, 3, 5).centers == kmeans_fit(pts, 3, 5).centers);
}

TEST_CASE("nearest distance oracles") {
    const ClusterModel model{Tensor::matrix({{0, 0}, {3, 4}, {-1, 1}})};
    CHECK(nearest_distance(std::vector<double>{3, 4}, model).distance == 0.0);
    CHECK(nearest_distance(std::vector<double>{3, 4}, model).index == 1);

    const ClusterModel single{Tensor::matrix({{1, 2}})};
    CHECK(nearest_distance(std::vector<double>{4, 6}, single).distance == doctest::Approx(5.0));

    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor r = random_tensor({2}, rng, -3.0, 3.0);
        const NearestCenter got = nearest_distance(r.values(), model);
        double best = 1e300;
        std::size_t idx = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double dx = r[0] - model.centers.at(c, 0), dy = r[1] - model.centers.at(c, 1);
            const double d = std::sqrt(dx * dx + dy * dy);
            CHECK(got.distance <= d + 1e-12);
            if (d < best) {
                best = d;
                idx = c;
            }
        }
        CHECK(got.distance == doctest::Approx(best));
        CHECK(got.index == idx);
    }

    // ties go to the lower index
    const ClusterModel tied{Tensor::matrix({{-1, 0}, {1, 0}})};
    CHECK(nearest_distance(std::vector<double>{0, 0}, tied).index == 0);
    CHECK_THROWS_AS(nearest_distance(std::vector<double>{0, 0, 0}, tied), DimensionError);
}

TEST_CASE("clustering loss oracles") {
    const ClusterModel model{Tensor::matrix({{0, 0}, {2, 2}})};
    CHECK(clustering_loss(Tensor::matrix({{0, 0}, {2, 2}}), model) == 0.0);
    const ClusterModel single{Tensor::matrix({{1, 1}})};
    CHECK(clustering_loss(Tensor::matrix({{2, 3}}), single) == doctest::Approx(5.0));
    // rows (0,1) -> center 0 at distance^2 1; (3,2) -> center 1 at distance^2 1
    CHECK(clustering_loss(Tensor::matrix({{0, 1}, {3, 2}}), model) == doctest::Approx((1.0 + 1.0) / 2.0));
}

TEST_CASE("clustering loss gradient") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const ClusterModel model{random_tensor({3, 4}, rng)};
        const auto fn = [&](Tape&, const std::vector<Var>& v) { return clustering_loss(v[0], model); };
        CHECK(grad_check(fn, {random_tensor({5, 4}, rng)}).max_rel_error < 1e-6);
    }
}

TEST_CASE("update centers") {
    const ClusterModel model{Tensor::matrix({{0.0}, {10.0}, {100.0}})};
    const Tensor pts({5, 1}, {1, 2, 9, 12, 3});
    const ClusterModel next = update_centers(model, pts);
    CHECK(next.centers[0] == doctest::Approx(2.0));
    CHECK(next.centers[1] == doctest::Approx(10.5));
    CHECK(next.centers[2] == 100.0);  // empty cluster keeps its center

    const Tensor balanced({4, 1}, {-1, 1, 9, 11});
    const ClusterModel moved = update_centers(ClusterModel{Tensor::matrix({{0.0}, {10.0}})}, balanced);
    CHECK(moved.centers[0] == doctest::Approx(0.0));
    CHECK(moved.centers[1] == doctest::Approx(10.0));
}
