#include <doctest.h>

#include <cmath>

#include "crc/decomposer.hpp"
#include "crc/error.hpp"
#include "crc/gradcheck.hpp"
#include "test_util.hpp"

using namespace crc;
using crc::test::random_tensor;

TEST_CASE("pool_stats oracles") {
    Tape tape;
    const Var constant = tape.constant(Tensor({3, 2, 2}, 0.7));
    const PoolStats s = pool_stats(constant, constant);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(s.f_avg.value()[c] == doctest::Approx(0.7));
        CHECK(s.f_max.value()[c] == 0.7);
    }

    const Var pixel = tape.constant(Tensor({1, 1, 3}, {1, -2, 3}));
    const PoolStats p = pool_stats(pixel, pixel);
    CHECK(p.f_avg.value() == Tensor({3}, {1, -2, 3}));
    CHECK(p.f_max.value() == Tensor({3}, {1, -2, 3}));

    const Var square = tape.constant(Tensor({2, 2, 1}, {1, 2, 3, 4}));
    const PoolStats q = pool_stats(square, square);
    CHECK(q.f_avg.value()[0] == doctest::Approx(2.5));
    CHECK(q.f_max.value()[0] == 4.0);

    CHECK_THROWS_AS(pool_stats(square, pixel), DimensionError);
}

TEST_CASE("equal features give one-half scores at init") {
    Rng rng(3);
    const DecomposerParams params = DecomposerParams::init(8, rng);
    Tape tape;
    Binder bind(tape, false);
    const Var f = tape.constant(random_tensor({4, 4, 8}, rng));
    const auto [alpha, beta] = difference_scores(bind, pool_stats(f, f), params);
    for (std::size_t c = 0; c < 8; ++c) {
        CHECK(alpha.value()[c] == 0.5);
        CHECK(beta.value()[c] == 0.5);
    }
}

TEST_CASE("scores stay inside the open unit interval") {
    Rng rng(5);
    const DecomposerParams params = DecomposerParams::init(8, rng);
    for (double magnitude : {1.0, 1e2, 1e6}) {
        Tape tape;
        Binder bind(tape, false);
        const Var f = tape.constant(random_tensor({2, 2, 8}, rng, -magnitude, magnitude));
        const Var fp = tape.constant(random_tensor({2, 2, 8}, rng, -magnitude, magnitude));
        const auto [alpha, beta] = difference_scores(bind, pool_stats(f, fp), params);
        for (std::size_t c = 0; c < 8; ++c) {
            CHECK(alpha.value()[c] > 0.0);
            CHECK(alpha.value()[c] < 1.0);
            CHECK(beta.value()[c] > 0.0);
            CHECK(beta.value()[c] < 1.0);
        }
    }
}

namespace {

// Independent forward of the three-layer score network.
std::vector<double> reference_mlp(const ScoreMlp& mlp, std::vector<double> x) {
    for (std::size_t l = 0; l < 3; ++l) {
        const DenseLayer& layer = mlp.layers[l];
        const std::size_t in = layer.weight.dim(0), out = layer.weight.dim(1);
        std::vector<double> y(out);
        for (std::size_t o = 0; o < out; ++o) {
            double s = layer.bias[o];
            for (std::size_t i = 0; i < in; ++i) s += x[i] * layer.weight.at(i, o);
            y[o] = l < 2 ? std::max(0.0, s) : 1.0 / (1.0 + std::exp(-s));
        }
        x = std::move(y);
    }
    return x;
}

}  // namespace

TEST_CASE("score network matches a reference forward") {
    Rng rng(9);
    DecomposerParams params = DecomposerParams::init(8, rng);
    for (Tensor* t : params.tensors())
        if (t->rank() == 1)
            for (auto& v : t->values()) v = rng.uniform(-0.3, 0.3);
    const Tensor x = random_tensor({8}, rng, -2.0, 2.0);
    Tape tape;
    Binder bind(tape, false);
    const Tensor got = score_mlp(bind, params.avg_branch, tape.constant(x)).value();
    const std::vector<double> want = reference_mlp(params.avg_branch, x.storage());
    for (std::size_t c = 0; c < 8; ++c) CHECK(std::abs(got[c] - want[c]) < 1e-14);
}

TEST_CASE("decompose oracles") {
    Rng rng(1);
    Tape tape;
    const Tensor fv = random_tensor({2, 3, 4}, rng), pv = random_tensor({2, 3, 4}, rng);
    const Var f = tape.constant(fv), p = tape.constant(pv);
    const Var ones = tape.constant(Tensor({4}, 1.0)), zeros = tape.constant(Tensor({4}, 0.0));
    const Var half = tape.constant(Tensor({4}, 0.5));

    auto [fp1, fs1] = decompose(f, p, ones, ones);
    CHECK(fp1.value() == fv);
    CHECK(fs1.value() == Tensor(fv.shape(), 0.0));

    auto [fp0, fs0] = decompose(f, p, zeros, zeros);
    CHECK(fp0.value() == Tensor(fv.shape(), 0.0));
    CHECK(fs0.value() == pv);

    auto [fph, fsh] = decompose(f, f, half, half);
    for (std::size_t i = 0; i < fv.size(); ++i) {
        CHECK(fph.value()[i] == 0.5 * fv[i]);
        CHECK(fsh.value()[i] == 0.5 * fv[i]);
        CHECK(fph.value()[i] + fsh.value()[i] == doctest::Approx(fv[i]));
    }

    CHECK_THROWS_AS(decompose(f, p, tape.constant(Tensor({3}, 0.5)), half), DimensionError);
}

TEST_CASE("raising one score moves energy from shared to private") {
    Rng rng(2);
    Tape tape;
    const Var f = tape.constant(random_tensor({2, 2, 3}, rng, 0.1, 1.0));
    const Var p = tape.constant(random_tensor({2, 2, 3}, rng, 0.1, 1.0));
    const Var beta = tape.constant(Tensor({3}, {0.4, 0.4, 0.4}));
    const auto channel_norm = [](const Tensor& t, std::size_t c) {
        double s = 0.0;
        for (std::size_t i = c; i < t.size(); i += 3) s += t[i] * t[i];
        return std::sqrt(s);
    };
    auto [fp_lo, fs_lo] = decompose(f, p, tape.constant(Tensor({3}, {0.2, 0.3, 0.4})), beta);
    auto [fp_hi, fs_hi] = decompose(f, p, tape.constant(Tensor({3}, {0.2, 0.6, 0.4})), beta);
    CHECK(channel_norm(fp_hi.value(), 1) > channel_norm(fp_lo.value(), 1));
    CHECK(channel_norm(fs_hi.value(), 1) < channel_norm(fs_lo.value(), 1));
    CHECK(channel_norm(fp_hi.value(), 0) == channel_norm(fp_lo.value(), 0));
}

TEST_CASE("ablation reuses the remaining score") {
    Rng rng(4);
    const DecomposerParams params = DecomposerParams::init(4, rng);
    Tape tape;
    Binder bind(tape, false);
    const Var f = tape.constant(random_tensor({2, 2, 4}, rng));
    const Var p = tape.constant(random_tensor({2, 2, 4}, rng));
    const DecomposedFeatures no_avg = run_decomposer(bind, params, f, p, {false, true});
    CHECK(no_avg.alpha.value() == no_avg.beta.value());
    const DecomposedFeatures no_max = run_decomposer(bind, params, f, p, {true, false});
    CHECK(no_max.alpha.value() == no_max.beta.value());
}

TEST_CASE("decomposer gradients") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        DecomposerParams params = DecomposerParams::init(8, rng);
        for (Tensor* t : params.tensors())
            if (t->rank() == 1)
                for (auto& v : t->values()) v = rng.uniform(-0.3, 0.3);
        const Tensor f = random_tensor({3, 3, 8}, rng), p = random_tensor({3, 3, 8}, rng);
        Rng wr(31);
        const Tensor wf = random_tensor({3, 3, 8}, wr), ws = random_tensor({3, 3, 8}, wr);

        std::vector<Tensor*> ptrs = params.tensors();
        std::vector<Tensor> inputs = {f, p};
        for (Tensor* t : ptrs) inputs.push_back(*t);
        const auto fn = [&](Tape& tape, const std::vector<Var>& v) {
            Binder bind(tape, true);
            for (std::size_t i = 0; i < ptrs.size(); ++i) bind.bind(*ptrs[i], v[i + 2]);
            const DecomposedFeatures d = run_decomposer(bind, params, v[0], v[1]);
            return ad::add(ad::sum(ad::mul(d.private_part, tape.constant(wf))),
                           ad::sum(ad::mul(d.shared_part, tape.constant(ws))));
        };
        // The weighted sum is O(10) while some entries are O(1e-5); eps = 1e-6
        // leaves rounding noise of about 1e-9 on those entries.
        const GradCheckReport r = grad_check(fn, inputs, 1e-5);
        INFO("seed " << seed << " input " << r.worst_input << " index " << r.worst_index << " analytic " << r.analytic
                     << " numeric " << r.numeric);
        CHECK(r.max_rel_error < 1e-6);
    }
}
