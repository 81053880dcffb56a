#include <doctest.h>

#include <filesystem>

#include "sqa/checkpoint.hpp"
#include "sqa/errors.hpp"

using namespace sqa;

TEST_SUITE("checkpoint") {
  TEST_CASE("bit-exact round trip") {
    for (int n : {1, 5, 64, 70, 130}) {
      const CostMode mode = n == 1 ? CostMode::Spikeless : CostMode::Spike;
      const SpikeParams p = make_spike_params(n, n == 1 ? 0.0 : 0.3, 0.0, mode);
      Rng rng(static_cast<std::uint64_t>(n));
      const WorldlineState st = WorldlineState::random(p, 5, rng);
      CheckpointHeader h{n, 5, 0.375, 12.5, 0xdeadbeefcafeULL, 123456789, p.alpha, p.eta, mode};
      const Checkpoint back = decode_checkpoint(encode_checkpoint(h, st));
      CHECK(back.header.n == n);
      CHECK(back.header.slices == 5);
      CHECK(back.header.s == 0.375);
      CHECK(back.header.beta == 12.5);
      CHECK(back.header.seed == 0xdeadbeefcafeULL);
      CHECK(back.header.steps == 123456789);
      CHECK(back.header.mode == mode);
      CHECK(std::equal(st.words().begin(), st.words().end(), back.state.words().begin(), back.state.words().end()));
      CHECK(back.state.jump_count() == st.jump_count());
      CHECK(back.state.spike_time() == st.spike_time());
      CHECK(back.state.caches_consistent());
    }
  }

  TEST_CASE("file round trip") {
    const SpikeParams p = make_spike_params(12, 0.5, 0.2);
    Rng rng(8);
    const WorldlineState st = WorldlineState::random(p, 9, rng);
    const auto path = (std::filesystem::temp_directory_path() / "sqa_checkpoint_test.bin").string();
    save_checkpoint(path, {12, 9, 0.5, 3.0, 8, 0, 0.5, 0.2, CostMode::Spike}, st);
    const Checkpoint back = load_checkpoint(path);
    CHECK(std::equal(st.words().begin(), st.words().end(), back.state.words().begin(), back.state.words().end()));
    std::filesystem::remove(path);
  }

  TEST_CASE("corrupt inputs are rejected") {
    const SpikeParams p = make_spike_params(8, 0.5, 0.2);
    Rng rng(8);
    const WorldlineState st = WorldlineState::random(p, 3, rng);
    auto bytes = encode_checkpoint({8, 3, 0.5, 3.0, 8, 0, 0.5, 0.2, CostMode::Spike}, st);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad), DomainError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(decode_checkpoint(bad), DomainError);
    bad = bytes;
    bad.back() = 0xff;  // bits beyond n in the last word
    CHECK_THROWS_AS(decode_checkpoint(bad), DomainError);
    CHECK_THROWS_AS(encode_checkpoint({9, 3, 0.5, 3.0, 8, 0, 0.5, 0.2, CostMode::Spike}, st), DomainError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/x.bin"), DomainError);
  }
}
