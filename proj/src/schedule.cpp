#include "sqa/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqa/errors.hpp"

namespace sqa {
namespace {

constexpr std::int64_t kStopPollInterval = 4096;

std::int64_t sweep_steps(double sweeps, std::int64_t sites) {
  return static_cast<std::int64_t>(std::ceil(sweeps * static_cast<double>(sites)));
}

// Best-seen bookkeeping shared by the burn-in and the schedule stages.
struct Tracker {
  int best_weight;
  double best_cost;
  std::vector<std::uint8_t> best_bits;

  void consider_all(const WorldlineState& st, const CostTable& cost) {
    for (int i = 0; i < st.slices(); ++i) consider(st, cost, i);
  }
  void consider(const WorldlineState& st, const CostTable& cost, int slice) {
    const int k = st.slice_weight(slice);
    best_weight = std::min(best_weight, k);
    if (cost(k) < best_cost) {
      best_cost = cost(k);
      best_bits = st.slice_bits(slice);
    }
  }
};

// Runs `steps` proposals at one s; returns false if stopped early.
bool run_stage(WorldlineState& st, const PimcConfig& cfg, std::int64_t steps, Rng& rng, Tracker& tr,
               StageRecord& rec, const std::stop_token& stop) {
  const std::int64_t unit = std::max<std::int64_t>(1, cfg.sites());
  double weight_acc = 0.0;
  double st_acc = 0.0;
  std::int64_t samples = 0;
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
  std::int64_t t = 0;
  for (; t < steps; ++t) {
    if (t % kStopPollInterval == 0 && stop.stop_requested()) break;
    const StepResult r = metropolis_step(st, cfg, rng);
    if (r.proposed) {
      ++proposals;
      if (r.accepted) {
        ++accepted;
        tr.consider(st, cfg.cost(), r.slice);
      }
    }
    if ((t + 1) % unit == 0) {
      weight_acc += static_cast<double>(st.weight_sum()) / st.slices();
      st_acc += static_cast<double>(st.spike_time());
      ++samples;
    }
  }
  if (samples == 0) {
    weight_acc = static_cast<double>(st.weight_sum()) / st.slices();
    st_acc = static_cast<double>(st.spike_time());
    samples = 1;
  }
  rec.steps = t;
  rec.acceptance_rate = proposals ? static_cast<double>(accepted) / proposals : 0.0;
  rec.mean_weight = weight_acc / samples;
  rec.mean_spike_time = st_acc / samples;
  rec.min_slice_weight = st.min_slice_weight();
  return t == steps;
}

}  // namespace

double default_beta(const SpikeParams& p, double c) {
  if (!(c > 0.0)) throw DomainError("beta multiplier c must be > 0");
  return c * std::pow(static_cast<double>(p.n), 0.5 + p.alpha + p.eta);
}

Schedule build_schedule(int n, double beta, int slices, double c_s, double sweeps_multiplier) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(beta > 0.0)) throw DomainError("beta must be > 0");
  if (slices < 2) throw DomainError("slice count L must be >= 2");
  if (!(c_s > 0.0)) throw DomainError("schedule multiplier c_s must be > 0");
  if (!(sweeps_multiplier > 0.0)) throw DomainError("sweeps multiplier must be > 0");
  Schedule sch;
  sch.beta = beta;
  sch.slices = slices;
  sch.delta_s = c_s / (n * beta * (1.0 + std::log(static_cast<double>(n))));
  if (sch.delta_s >= 1.0) throw DomainError("schedule step delta_s = " + std::to_string(sch.delta_s) + " is >= 1");
  const auto count = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::floor(1.0 / sch.delta_s)));
  const double s_max = 1.0 - sch.delta_s;
  sch.s_values.resize(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    sch.s_values[static_cast<std::size_t>(i)] = s_max * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  sch.s_values.back() = s_max;
  sch.steps_per_s = std::max<std::int64_t>(1, sweep_steps(sweeps_multiplier, static_cast<std::int64_t>(n) * slices));
  return sch;
}

SqaKnobs default_sqa_knobs(const SpikeParams& p, CostMode mode, std::uint64_t seed, double c_beta, double c_L,
                           double c_s, double sweeps_multiplier) {
  validate(p, mode);
  SqaKnobs k;
  const double beta = default_beta(p, c_beta);
  k.schedule = build_schedule(p.n, beta, default_slice_count(p.n, beta, c_L), c_s, sweeps_multiplier);
  k.seed = seed;
  k.mode = mode;
  return k;
}

std::int64_t sqa_step_budget(const SpikeParams& p, const SqaKnobs& knobs) {
  const std::int64_t sites = static_cast<std::int64_t>(p.n) * knobs.schedule.slices;
  return sweep_steps(knobs.burn_in_sweeps, sites) +
         static_cast<std::int64_t>(knobs.schedule.s_values.size()) * knobs.schedule.steps_per_s;
}

RunReport run_sqa(const SpikeParams& p, const SqaKnobs& knobs, std::stop_token stop, const StageObserver& observer) {
  validate(p, knobs.mode);
  const Schedule& sch = knobs.schedule;
  if (sch.s_values.empty()) throw DomainError("schedule has no points");
  if (knobs.burn_in_sweeps < 0.0) throw DomainError("burn-in must be >= 0");

  RunReport rep;
  rep.algorithm = "sqa";
  rep.n = p.n;
  rep.seed = knobs.seed;

  Rng rng(knobs.seed);
  WorldlineState st = WorldlineState::random(p, sch.slices, rng);
  const CostTable table(p, knobs.mode);
  Tracker tr{p.n + 1, std::numeric_limits<double>::infinity(), {}};
  tr.consider_all(st, table);

  StageRecord burn;
  const PimcConfig cfg0(p, sch.beta, sch.slices, 0.0, knobs.mode);
  bool ok = run_stage(st, cfg0, sweep_steps(knobs.burn_in_sweeps, cfg0.sites()), rng, tr, burn, stop);
  rep.total_steps += burn.steps;

  for (std::size_t i = 0; ok && i < sch.s_values.size(); ++i) {
    const double s = sch.s_values[i];
    const PimcConfig cfg(p, sch.beta, sch.slices, s, knobs.mode);
    StageRecord rec;
    rec.knob = s;
    ok = run_stage(st, cfg, sch.steps_per_s, rng, tr, rec, stop);
    rep.total_steps += rec.steps;
    rep.stages.push_back(rec);
    if (ok && observer) observer(i, s, st);
  }

  rep.complete = ok;
  // Readout: every slice at s_max is a marginal sample; keep the cheapest, lowest index on ties.
  int pick = 0;
  for (int i = 1; i < st.slices(); ++i)
    if (table(st.slice_weight(i)) < table(st.slice_weight(pick))) pick = i;
  rep.final_bitstring = st.slice_bits(pick);
  rep.final_weight = st.slice_weight(pick);
  rep.final_cost = table(rep.final_weight);
  rep.best_weight_seen = tr.best_weight;
  rep.best_cost_seen = tr.best_cost;
  rep.best_bitstring = tr.best_bits;
  return rep;
}

}  // namespace sqa
