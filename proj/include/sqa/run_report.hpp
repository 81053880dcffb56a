#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sqa {

/// Summary of one fixed-parameter stage of an annealing run. For SQA the
/// stage is one s value; for SA it is one inverse temperature.
struct StageRecord {
  double knob = 0.0;  // s for SQA, beta for SA
  std::int64_t steps = 0;
  double acceptance_rate = 0.0;
  double mean_weight = 0.0;      // mean slice Hamming weight, sampled once per sweep unit
  double mean_spike_time = 0.0;  // SQA only
  int min_slice_weight = 0;      // at the end of the stage
};

struct RunReport {
  std::string algorithm;  // "sqa" or "sa"
  int n = 0;
  std::uint64_t seed = 0;
  bool complete = true;
  std::int64_t total_steps = 0;

  std::vector<std::uint8_t> final_bitstring;
  int final_weight = 0;
  double final_cost = 0.0;

  int best_weight_seen = 0;
  double best_cost_seen = 0.0;
  std::vector<std::uint8_t> best_bitstring;  // a minimum-cost bitstring

  std::vector<StageRecord> stages;

  bool final_success() const { return complete && final_weight == 0; }
};

std::string bitstring_to_string(const std::vector<std::uint8_t>& bits);

/// JSON object text (pretty-printed with two-space indent).
std::string report_to_json(const RunReport& report);

/// One row per stage: knob,steps,acceptance_rate,mean_weight,mean_spike_time,min_slice_weight
std::string stages_to_csv(const RunReport& report);

}  // namespace sqa
