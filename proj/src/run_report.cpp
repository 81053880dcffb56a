#include "sqa/run_report.hpp"

#include <iomanip>
#include "json.hpp"
#include <sstream>

namespace sqa {

std::string bitstring_to_string(const std::vector<std::uint8_t>& bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

std::string report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = r.algorithm;
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["complete"] = r.complete;
  j["total_steps"] = r.total_steps;
  j["final_bitstring"] = bitstring_to_string(r.final_bitstring);
  j["final_weight"] = r.final_weight;
  j["final_cost"] = r.final_cost;
  j["best_weight_seen"] = r.best_weight_seen;
  j["best_cost_seen"] = r.best_cost_seen;
  j["best_bitstring"] = bitstring_to_string(r.best_bitstring);
  auto& stages = j["stages"] = nlohmann::ordered_json::array();
  for (const auto& st : r.stages) {
    stages.push_back({{"knob", st.knob},
                      {"steps", st.steps},
                      {"acceptance_rate", st.acceptance_rate},
                      {"mean_weight", st.mean_weight},
                      {"mean_spike_time", st.mean_spike_time},
                      {"min_slice_weight", st.min_slice_weight}});
  }
  return j.dump(2);
}

std::string stages_to_csv(const RunReport& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "knob,steps,acceptance_rate,mean_weight,mean_spike_time,min_slice_weight\n";
  for (const auto& st : r.stages) {
    out << st.knob << ',' << st.steps << ',' << st.acceptance_rate << ',' << st.mean_weight << ','
        << st.mean_spike_time << ',' << st.min_slice_weight << '\n';
  }
  return out.str();
}

}  // namespace sqa
