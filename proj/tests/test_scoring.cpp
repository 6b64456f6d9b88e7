#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crc/error.hpp"
#include "crc/metrics.hpp"
#include "crc/scoring.hpp"
#include "crc/training.hpp"
#include "test_util.hpp"

using namespace crc;

namespace {

double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1.0;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return wins / pairs;
}

}  // namespace

TEST_CASE("auc oracles") {
    const std::vector<int> y = {0, 0, 1, 1};
    CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, y) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, y) == 0.0);
    CHECK(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, y) == 0.75);
    CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y) == 0.5);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), EvaluationError);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 1, 1}), EvaluationError);
}

TEST_CASE("auc equals pair counting on random instances with ties") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + rng.below(199);
        std::vector<double> s(m);
        std::vector<int> y(m);
        const std::size_t levels = 1 + rng.below(12);  // few levels force ties
        for (std::size_t i = 0; i < m; ++i) {
            s[i] = static_cast<double>(rng.below(levels)) / 4.0;
            y[i] = rng.below(2) ? 1 : 0;
        }
        y[0] = 0;
        y[1] = 1;
        CHECK(std::abs(roc_auc(s, y) - pair_count_auc(s, y)) <= 1e-12);
    }
}

TEST_CASE("auc ignores strictly increasing transforms") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s(50), t(50);
        std::vector<int> y(50);
        for (std::size_t i = 0; i < 50; ++i) {
            s[i] = rng.uniform(-2.0, 2.0);
            t[i] = std::exp(3.0 * s[i]) + 7.0;
            y[i] = i % 3 == 0;
        }
        CHECK(roc_auc(s, y) == roc_auc(t, y));
    }
}

TEST_CASE("roc sweep and eer") {
    const std::vector<int> y = {0, 0, 1, 1};
    const std::vector<double> perfect = {0.1, 0.2, 0.8, 0.9};
    const auto sweep = roc_sweep(perfect, y);
    REQUIRE(sweep.size() == 5);
    CHECK(sweep.front().fpr == 0.0);
    CHECK(sweep.front().tpr == 0.0);
    CHECK(sweep.back().fpr == 1.0);
    CHECK(sweep.back().tpr == 1.0);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        CHECK(sweep[i].fpr >= sweep[i - 1].fpr);
        CHECK(sweep[i].tpr >= sweep[i - 1].tpr);
        CHECK(sweep[i].threshold < sweep[i - 1].threshold);
    }
    CHECK(eer(perfect, y) == doctest::Approx(0.0));
    CHECK(eer(std::vector<double>{0.9, 0.8, 0.2, 0.1}, y) == doctest::Approx(1.0));
    CHECK(eer(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y) == doctest::Approx(0.5));

    const EvalReport r = evaluate(perfect, y);
    CHECK(r.auc == 1.0);
    CHECK(r.sweep.size() == sweep.size());
    CHECK(report_text(r).rfind("auc=1\n", 0) == 0);
    CHECK(sweep_csv(r).rfind("threshold,fpr,tpr\n", 0) == 0);
}

TEST_CASE("normalize oracles and properties") {
    const std::vector<double> v = {2, 4, 6};
    CHECK(normalize(v) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(normalize(std::vector<double>{3, 3, 3}) == std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(normalize(std::vector<double>{}), DataError);

    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(30);
        for (auto& e : x) e = rng.uniform(-100.0, 100.0);
        const auto n = normalize(x);
        CHECK(*std::min_element(n.begin(), n.end()) == 0.0);
        CHECK(*std::max_element(n.begin(), n.end()) == 1.0);
        const auto nn = normalize(n);
        for (std::size_t i = 0; i < n.size(); ++i) CHECK(std::abs(nn[i] - n[i]) < 1e-15);
    }
}

TEST_CASE("window score hand-computed fixture") {
    // R = I, R~ = [[1,1],[0,0]]: C1 = [[1,1],[0,0]], gap 2.
    // One center at (t,t) with t = (2 + sqrt 14) / 4 puts both rows at distance 1.5.
    TrainConfig config = profile_config("synth");
    const double t = (2.0 + std::sqrt(14.0)) / 4.0;
    Model model;
    model.clusters = ClusterModel{Tensor::matrix({{t, t}})};
    const std::vector<ClipRepresentation> window = {
        {Tensor({2}, {1, 0}), Tensor({2}, {1, 1})},
        {Tensor({2}, {0, 1}), Tensor({2}, {0, 0})},
    };
    const WindowScore w = window_score(window, model, config);
    CHECK(w.consistency_gap == doctest::Approx(2.0));
    CHECK(w.distance == doctest::Approx(1.5));
    CHECK(w.raw == doctest::Approx(3.0));

    config.use_clustering = false;
    CHECK(window_score(window, model, config).raw == doctest::Approx(2.0));
    config.use_clustering = true;
    model.clusters.reset();
    CHECK_THROWS_AS(window_score(window, model, config), InferenceError);
    CHECK_THROWS_AS(window_score(std::span(window).first(1), model, config), DataError);
}

TEST_CASE("score_video on a minimal video") {
    TrainConfig config = gradcheck_config(true);
    Rng rng(3);
    Model model = Model::init(config, rng);
    model.clusters = ClusterModel{crc::test::random_tensor({config.clusters, config.factors}, rng)};
    const std::size_t frames = config.clip_length + config.batch_size - 1;
    const Video video{crc::test::random_tensor(
        {frames, config.frame_height, config.frame_width, config.input_channels}, rng, 0.0, 1.0)};

    const ScoreSeries s = score_video(model, config, video);
    CHECK(s.raw.size() == frames);
    CHECK(s.windows.size() == 1);
    CHECK(s.first_scored_frame == frames - 1);
    for (double v : s.normalized) CHECK(v == 0.0);
    for (double v : s.raw) CHECK(v == s.windows[0].raw);

    const Video short_video{crc::test::random_tensor(
        {frames - 1, config.frame_height, config.frame_width, config.input_channels}, rng, 0.0, 1.0)};
    CHECK_THROWS_AS(score_video(model, config, short_video), DataError);
    const Video wrong_size{crc::test::random_tensor({frames, 8, 8, config.input_channels}, rng, 0.0, 1.0)};
    CHECK_THROWS_AS(score_video(model, config, wrong_size), DataError);

    const Video longer{crc::test::random_tensor(
        {frames + 6, config.frame_height, config.frame_width, config.input_channels}, rng, 0.0, 1.0)};
    const ScoreSeries l = score_video(model, config, longer);
    CHECK(l.windows.size() == 7);
    for (double v : l.normalized) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("score csv round trip") {
    ScoreSeries s;
    s.raw = {0.1, 1.0 / 3.0, 2.5};
    s.normalized = normalize(s.raw);
    s.labels = {0, 1, 1};
    crc::test::TempDir dir("scores");
    save_scores(dir.file("s.csv"), s);
    const ScoreSeries back = load_scores(dir.file("s.csv"));
    CHECK(back.raw == s.raw);
    CHECK(back.normalized == s.normalized);
    CHECK(back.labels == s.labels);

    s.labels.clear();
    save_scores(dir.file("n.csv"), s);
    CHECK(load_scores(dir.file("n.csv")).labels.empty());
    CHECK_THROWS_AS(load_scores(dir.file("missing.csv")), DataError);
}
