#include <doctest.h>

#include <cmath>

#include "sqa/baseline_sa.hpp"
#include "sqa/errors.hpp"
#include "sqa/rng.hpp"
#include "sqa/schedule.hpp"

using namespace sqa;

TEST_SUITE("schedule") {
  TEST_CASE("default beta") {
    CHECK(default_beta(make_spike_params(16, 0.6, 0.2)) == doctest::Approx(std::pow(16.0, 1.3)));
    CHECK(default_beta(make_spike_params(16, 0.6, 0.2)) == doctest::Approx(36.758).epsilon(1e-4));
    CHECK(default_beta(make_spike_params(16, 0.0, 0.0)) == doctest::Approx(4.0));
    CHECK(default_beta(make_spike_params(16, 0.6, 0.2), 2.0) == doctest::Approx(2.0 * std::pow(16.0, 1.3)));
  }

  TEST_CASE("schedule grid") {
    const Schedule s = build_schedule(4, 4.0, 128, 1.0, 10.0);
    CHECK(s.delta_s == doctest::Approx(1.0 / (16.0 * (1.0 + std::log(4.0)))));
    CHECK(s.delta_s == doctest::Approx(0.02618).epsilon(1e-3));
    CHECK(s.s_values.size() == 38);
    CHECK(s.s_values.front() == 0.0);
    CHECK(std::abs(s.s_values.back() - (1.0 - s.delta_s)) < 1e-12);
    const double h = s.s_values[1] - s.s_values[0];
    for (std::size_t i = 1; i < s.s_values.size(); ++i) {
      CHECK(s.s_values[i] > s.s_values[i - 1]);
      CHECK(s.s_values[i] - s.s_values[i - 1] == doctest::Approx(h).epsilon(1e-9));
    }
    CHECK(s.steps_per_s == 10 * 4 * 128);

    const Schedule half = build_schedule(4, 4.0, 128, 0.5, 10.0);
    CHECK(std::abs(static_cast<long>(half.s_values.size()) - 2 * static_cast<long>(s.s_values.size())) <= 1);
    CHECK_THROWS_AS(build_schedule(1, 0.5, 4, 1.0, 1.0), DomainError);
  }

  TEST_CASE("replay is deterministic and the state is carried between stages") {
    const SpikeParams p = make_spike_params(8, 0.6, 0.2);
    SqaKnobs k = default_sqa_knobs(p, CostMode::Spike, 99, 0.5, 0.01, 20.0, 2.0);
    std::vector<std::vector<std::uint64_t>> carried;
    const RunReport a = run_sqa(p, k, {}, [&](std::size_t, double, const WorldlineState& st) {
      carried.emplace_back(st.words().begin(), st.words().end());
    });
    const RunReport b = run_sqa(p, k);
    CHECK(report_to_json(a) == report_to_json(b));
    CHECK(carried.size() == k.schedule.s_values.size());
    CHECK(a.complete);
    CHECK(a.total_steps == sqa_step_budget(p, k));

    // Replaying the pieces by hand reproduces every carried state.
    Rng rng(k.seed);
    WorldlineState st = WorldlineState::random(p, k.schedule.slices, rng);
    const PimcConfig c0(p, k.schedule.beta, k.schedule.slices, 0.0);
    sweep(st, c0, static_cast<std::int64_t>(std::ceil(k.burn_in_sweeps * c0.sites())), rng);
    for (std::size_t i = 0; i < k.schedule.s_values.size(); ++i) {
      sweep(st, PimcConfig(p, k.schedule.beta, k.schedule.slices, k.schedule.s_values[i]), k.schedule.steps_per_s, rng);
      REQUIRE(std::equal(st.words().begin(), st.words().end(), carried[i].begin(), carried[i].end()));
    }
  }

  TEST_CASE("report invariants") {
    const SpikeParams p = make_spike_params(16, 0.6, 0.2);
    const SqaKnobs k = default_sqa_knobs(p, CostMode::Spike, 5, 0.3, 0.01, 20.0, 5.0);
    const RunReport r = run_sqa(p, k);
    for (const auto& st : r.stages) CHECK(r.best_weight_seen <= st.min_slice_weight);
    CHECK(r.best_cost_seen <= r.final_cost);
    CHECK(r.best_bitstring.size() == 16);
    CHECK(r.final_bitstring.size() == 16);
    int w = 0;
    for (auto b : r.final_bitstring) w += b;
    CHECK(w == r.final_weight);
    // Near s = 0 the slices are close to uniform bits.
    CHECK(r.stages.front().mean_weight == doctest::Approx(8.0).epsilon(0.2));
  }

  TEST_CASE("stop request yields a partial report") {
    const SpikeParams p = make_spike_params(16, 0.6, 0.2);
    const SqaKnobs k = default_sqa_knobs(p, CostMode::Spike, 5, 0.3, 0.01, 20.0, 5.0);
    std::stop_source src;
    std::size_t seen = 0;
    const RunReport r = run_sqa(p, k, src.get_token(), [&](std::size_t i, double, const WorldlineState&) {
      seen = i + 1;
      if (i == 2) src.request_stop();
    });
    CHECK_FALSE(r.complete);
    CHECK_FALSE(r.final_success());
    CHECK(seen == 3);
    CHECK(r.total_steps < sqa_step_budget(p, k));
  }

  TEST_CASE("spike-less SQA finds weight 0") {
    const SpikeParams p = make_spike_params(8, 0.6, 0.2, CostMode::Spikeless);
    int ok = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const SqaKnobs k = default_sqa_knobs(p, CostMode::Spikeless, derive_seed(17, i), 1.0, 0.005, 20.0, 10.0);
      ok += run_sqa(p, k).final_success() ? 1 : 0;
    }
    MESSAGE("spike-less successes: ", ok, "/100");
    CHECK(ok >= 95);
  }

  TEST_CASE("SQA beats SA at n = 16 in the polynomial regime") {
    const SpikeParams p = make_spike_params(16, 0.6, 0.2);
    int sqa_ok = 0, sa_ok = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      SqaKnobs k;
      k.schedule = build_schedule(16, 15.0, 16, 100.0, 100.0);
      k.seed = derive_seed(23, i);
      sqa_ok += run_sqa(p, k).final_success() ? 1 : 0;
      const std::int64_t budget = sqa_step_budget(p, k);
      sa_ok += run_sa(default_sa_config(p, CostMode::Spike, derive_seed(29, i), budget / 100)).final_success() ? 1 : 0;
    }
    MESSAGE("n=16 successes: SQA ", sqa_ok, "/100, SA ", sa_ok, "/100");
    CHECK(sqa_ok > sa_ok);
  }
}
