#include <doctest.h>

#include <cmath>

#include "crc/error.hpp"
#include "crc/gradcheck.hpp"
#include "crc/memory.hpp"
#include "test_util.hpp"

using namespace crc;
using crc::test::random_tensor;

namespace {

void check_unit_columns(const Tensor& m) {
    for (std::size_t e = 0; e < m.dim(1); ++e) {
        double s = 0.0;
        for (std::size_t c = 0; c < m.dim(0); ++c) s += m.at(c, e) * m.at(c, e);
        CHECK(std::abs(std::sqrt(s) - 1.0) < 1e-9);
    }
}

}  // namespace

TEST_CASE("expand oracles and inverse") {
    const Tensor one({1, 1, 3}, {1, 2, 3});
    const Tensor e1 = expand(one);
    CHECK(e1.shape() == Shape{3, 1});
    CHECK(e1 == Tensor({3, 1}, {1, 2, 3}));

    const Tensor f({2, 2, 1}, {10, 20, 30, 40});
    CHECK(expand(f) == Tensor({1, 4}, {10, 20, 30, 40}));

    Rng rng(2);
    const Tensor g = random_tensor({3, 5, 4}, rng);
    const Tensor eg = expand(g);
    CHECK(eg.at(2, 7) == g.at(1, 2, 2));
    CHECK(unexpand(eg, 3, 5) == g);
}

TEST_CASE("init gives unit columns") {
    Rng rng(4);
    const MemoryPool pool = MemoryPool::init(6, 9, rng);
    CHECK(pool.items.shape() == Shape{6, 9});
    check_unit_columns(pool.items);
    CHECK_THROWS_AS(MemoryPool::init(0, 3, rng), ConfigError);
}

TEST_CASE("read oracles") {
    Rng rng(8);
    const Tensor f = random_tensor({2, 3, 4}, rng);

    const MemoryPool single{l2_normalize(random_tensor({4, 1}, rng), 0)};
    const Tensor r1 = read(single, f);
    for (std::size_t q = 0; q < 6; ++q)
        for (std::size_t c = 0; c < 4; ++c) CHECK(r1[q * 4 + c] == doctest::Approx(single.items.at(c, 0)));

    Tensor same({4, 5});
    for (std::size_t e = 0; e < 5; ++e)
        for (std::size_t c = 0; c < 4; ++c) same.at(c, e) = 0.5;
    const Tensor r2 = read(MemoryPool{same}, f);
    for (double v : r2.values()) CHECK(v == doctest::Approx(0.5));

    const MemoryPool pm{Tensor::matrix({{1, -1}})};
    const Tensor q({1, 1, 1}, {10.0});
    const Tensor w = read_weights(pm, q);
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(w[1] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(read(pm, q)[0] == doctest::Approx(1.0).epsilon(1e-8));

    CHECK_THROWS_AS(read(pm, random_tensor({2, 2, 3}, rng)), DimensionError);
}

TEST_CASE("read weights lie on the simplex") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const MemoryPool pool = MemoryPool::init(5, 7, rng);
        const Tensor f = random_tensor({3, 3, 5}, rng, -4.0, 4.0);
        const Tensor w = read_weights(pool, f);
        for (std::size_t q = 0; q < w.dim(0); ++q) {
            double s = 0.0;
            for (std::size_t e = 0; e < w.dim(1); ++e) {
                CHECK(w.at(q, e) >= 0.0);
                CHECK(w.at(q, e) <= 1.0);
                s += w.at(q, e);
            }
            CHECK(std::abs(s - 1.0) < 1e-12);
        }
        // Each output coordinate stays within the range of the memory row.
        const Tensor r = read(pool, f);
        for (std::size_t q = 0; q < 9; ++q)
            for (std::size_t c = 0; c < 5; ++c) {
                double lo = 1e9, hi = -1e9;
                for (std::size_t e = 0; e < 7; ++e) {
                    lo = std::min(lo, pool.items.at(c, e));
                    hi = std::max(hi, pool.items.at(c, e));
                }
                CHECK(r[q * 5 + c] >= lo - 1e-12);
                CHECK(r[q * 5 + c] <= hi + 1e-12);
            }
    }
}

TEST_CASE("write oracles") {
    Rng rng(6);
    const Tensor m = random_tensor({3, 4}, rng);
    const MemoryPool pool{m};
    const MemoryPool zero_write = write(pool, Tensor({2, 2, 3}, 0.0));
    const Tensor expected = l2_normalize(m, 0);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(zero_write.items[i] == doctest::Approx(expected[i]));

    const MemoryPool tiny{Tensor({1, 1}, {2.0})};
    const MemoryPool w = write(tiny, Tensor({1, 2, 1}, {1.0, 3.0}));
    CHECK(w.items[0] == doctest::Approx(1.0));

    const MemoryPool neg{Tensor({1, 1}, {-2.0})};
    CHECK(write(neg, Tensor({1, 2, 1}, {0.1, 0.2})).items[0] == doctest::Approx(-1.0));
}

TEST_CASE("write keeps shape and unit columns") {
    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        MemoryPool pool = MemoryPool::init(4, 6, rng);
        std::vector<Tensor> maps = {random_tensor({3, 3, 4}, rng, 0.0, 2.0), random_tensor({3, 3, 4}, rng, 0.0, 2.0)};
        pool = write(pool, maps);
        CHECK(pool.items.shape() == Shape{4, 6});
        check_unit_columns(pool.items);
    }
}

// Features reaching the memory are ReLU outputs, so the fixtures are
// nonnegative. With signed features the second step can exceed the first.
TEST_CASE("repeated write settles") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        MemoryPool pool = MemoryPool::init(4, 5, rng);
        const Tensor f = random_tensor({3, 3, 4}, rng, 0.0, 1.0);
        double prev = 1e300;
        for (int it = 0; it < 100; ++it) {
            const MemoryPool next = write(pool, f);
            double step = 0.0;
            for (std::size_t i = 0; i < next.items.size(); ++i)
                step += (next.items[i] - pool.items[i]) * (next.items[i] - pool.items[i]);
            step = std::sqrt(step);
            CHECK(step <= prev + 1e-12);
            prev = step;
            pool = next;
        }
    }
}

TEST_CASE("nearest entries match brute force") {
    const Tensor m = Tensor::matrix({{0.0, 1.0, 3.0}});
    const Tensor f({1, 3, 1}, {0.4, 2.2, 5.0});
    const NearestEntries n = nearest_entries(m, f);
    CHECK(n.first == std::vector<std::size_t>{0, 2, 2});
    CHECK(n.second == std::vector<std::size_t>{1, 1, 1});
}

TEST_CASE("compactness oracles") {
    const Tensor m = Tensor::matrix({{1.0, 0.0}, {0.0, 1.0}});
    const Tensor on_entries({1, 2, 2}, {1, 0, 0, 1});
    CHECK(compactness_loss(MemoryPool{m}, on_entries) == 0.0);

    const Tensor single_m({2, 1}, {0.5, -1.0});
    const Tensor q({1, 1, 2}, {2.0, 1.0});
    CHECK(compactness_loss(MemoryPool{single_m}, q) == doctest::Approx(1.5 * 1.5 + 2.0 * 2.0));

    const Tensor two = Tensor::matrix({{0.0, 1.0}});
    const Tensor mid({1, 1, 1}, {0.3});
    CHECK(compactness_loss(MemoryPool{two}, mid) == doctest::Approx(std::min(0.3 * 0.3, 0.7 * 0.7)));
}

TEST_CASE("separateness oracles") {
    const MemoryPool pool{Tensor::matrix({{0.0, 1.0}})};
    CHECK(separateness_loss(pool, Tensor({1, 1, 1}, {0.1}), 1.0) == doctest::Approx(0.2));
    CHECK(separateness_loss(pool, Tensor({1, 1, 1}, {0.5}), 1.0) == doctest::Approx(1.0));
    const MemoryPool far{Tensor::matrix({{0.0, 1e6}})};
    CHECK(separateness_loss(far, Tensor({1, 1, 1}, {0.1}), 1.0) == 0.0);
    CHECK_THROWS_AS(separateness_loss(MemoryPool{Tensor({1, 1}, {1.0})}, Tensor({1, 1, 1}, {0.1}), 1.0),
                    ConfigError);
}

TEST_CASE("memory gradients") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const Tensor m = l2_normalize(random_tensor({4, 5}, rng), 0);
        const Tensor f = random_tensor({3, 3, 4}, rng);
        Rng wr(77);
        const Tensor weights = random_tensor({3, 3, 4}, wr);
        const auto read_fn = [&](Tape& t, const std::vector<Var>& v) {
            return ad::sum(ad::mul(read(v[0], v[1]), t.constant(weights)));
        };
        CHECK(grad_check(read_fn, {m, f}).max_rel_error < 1e-6);
        const auto compact_fn = [](Tape&, const std::vector<Var>& v) { return compactness_loss(v[0], v[1]); };
        // Piecewise quadratic: a wide step is exact and keeps rounding noise low.
        const GradCheckReport rc = grad_check(compact_fn, {m, f}, 1e-4);
        INFO("seed " << seed << " input " << rc.worst_input << " index " << rc.worst_index << " analytic "
                     << rc.analytic << " numeric " << rc.numeric);
        CHECK(rc.max_rel_error < 1e-6);
        const auto separate_fn = [](Tape&, const std::vector<Var>& v) { return separateness_loss(v[0], v[1], 1.0); };
        CHECK(grad_check(separate_fn, {m, f}, 1e-4).max_rel_error < 1e-6);
    }
}
