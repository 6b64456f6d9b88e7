#include <doctest.h>

#include "crc/checkpoint.hpp"
#include "crc/error.hpp"
#include "crc/training.hpp"
#include "test_util.hpp"

using namespace crc;

namespace {

TrainState trained_state() {
    TrainConfig config = gradcheck_config(true);
    config.phase1_epochs = 1;
    config.total_epochs = 2;
    Rng rng(4);
    const std::vector<Video> data = {Video{crc::test::random_tensor({8, 16, 16, 1}, rng, 0.0, 1.0)}};
    TrainState state = TrainState::initial(config);
    train(state, data);
    return state;
}

std::uint64_t format_error_offset(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_checkpoint(bytes);
    } catch (const FormatError& e) {
        return e.offset();
    }
    FAIL("expected a FormatError");
    return 0;
}

}  // namespace

TEST_CASE("checkpoint round trip is byte stable") {
    const TrainState state = trained_state();
    REQUIRE(state.model.clusters.has_value());
    const auto bytes = encode_checkpoint(state);
    const TrainState back = decode_checkpoint(bytes);
    CHECK(encode_checkpoint(back) == bytes);
    CHECK(back.config == state.config);
    CHECK(back.epoch == state.epoch);
    CHECK(back.adam.step == state.adam.step);
    CHECK(back.model.memory.items == state.model.memory.items);
    CHECK(back.model.clusters->centers == state.model.clusters->centers);
    CHECK(Rng(back.rng).next_u64() == Rng(state.rng).next_u64());

    // Before phase 2 there is no cluster section.
    TrainState fresh = TrainState::initial(gradcheck_config(false));
    const auto fresh_bytes = encode_checkpoint(fresh);
    const TrainState fresh_back = decode_checkpoint(fresh_bytes);
    CHECK(!fresh_back.model.clusters);
    CHECK(encode_checkpoint(fresh_back) == fresh_bytes);
}

TEST_CASE("checkpoint files") {
    const TrainState state = trained_state();
    crc::test::TempDir dir("ckpt");
    save_checkpoint(dir.file("a.ckpt"), state);
    CHECK(encode_checkpoint(load_checkpoint(dir.file("a.ckpt"))) == encode_checkpoint(state));
    CHECK_THROWS_AS(load_checkpoint(dir.file("none.ckpt")), DataError);
    CHECK_THROWS_AS(save_checkpoint(dir.file("no/such/dir/a.ckpt"), state), DataError);
}

TEST_CASE("corrupt checkpoints are rejected with offsets") {
    const auto bytes = encode_checkpoint(trained_state());
    auto bad = bytes;
    bad[0] = 'X';
    CHECK(format_error_offset(bad) == 0);

    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
        INFO("cut " << cut);
        CHECK_THROWS_AS(decode_checkpoint(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + cut)),
                        FormatError);
    }
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_checkpoint(trailing), FormatError);
}
