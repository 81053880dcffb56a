#include "sqa/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "sqa/analysis.hpp"
#include "sqa/baseline_sa.hpp"
#include "sqa/dense_oracle.hpp"
#include "sqa/errors.hpp"
#include "sqa/exact_oracle.hpp"
#include "sqa/pimc.hpp"
#include "sqa/schedule.hpp"
#include "sqa/worker_pool.hpp"

namespace sqa {

int worker_count_from_env() {
  const char* v = std::getenv("SQA_WORKERS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long w = std::strtol(v, &end, 10);
  if (*end != '\0' || w < 1) throw DomainError(std::string("SQA_WORKERS must be a positive integer, got '") + v + "'");
  return static_cast<int>(std::min<long>(w, 256));
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

// Config echo and hash attached to every artifact.
struct Provenance {
  json config;
  std::string hash;

  explicit Provenance(json cfg) : config(std::move(cfg)), hash(hex64(fnv1a64(config.dump()))) {}

  std::string csv_header() const {
    return std::string("# tool=sqa ") + kToolVersion + "\n# config_hash=" + hash + "\n# config=" + config.dump() + "\n";
  }
  ojson meta() const {
    ojson m;
    m["tool"] = "sqa";
    m["version"] = kToolVersion;
    m["config_hash"] = hash;
    m["config"] = config;
    return m;
  }
};

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DomainError("cannot write " + path);
  f << content;
  if (!f) throw InternalError("failed writing " + path);
}

CostMode mode_of(bool spikeless) { return spikeless ? CostMode::Spikeless : CostMode::Spike; }

SpikeParams params_of(int n, double alpha, double eta, bool spikeless) {
  return make_spike_params(n, alpha, eta, mode_of(spikeless));
}

json model_json(int n, double alpha, double eta, bool spikeless) {
  return {{"n", n}, {"alpha", alpha}, {"eta", eta}, {"spikeless", spikeless}};
}

// Values from a JSON config file become flags unless already given on the
// command line.
std::vector<std::string> merge_json_config(const std::vector<std::string>& args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open config file " + path);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::exception& e) {
    throw DomainError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw DomainError("config file must hold a JSON object");
  std::vector<std::string> extra;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string flag = "--" + it.key();
    bool given = false;
    for (const auto& a : rest) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    const json& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) extra.push_back(flag);
    } else if (v.is_array()) {
      std::string joined;
      for (std::size_t k = 0; k < v.size(); ++k) joined += (k ? "," : "") + (v[k].is_string() ? v[k].get<std::string>() : v[k].dump());
      extra.push_back(flag);
      extra.push_back(joined);
    } else {
      extra.push_back(flag);
      extra.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
  }
  // Insert after the subcommand name.
  if (rest.size() < 2) return rest;
  rest.insert(rest.begin() + 2, extra.begin(), extra.end());
  return rest;
}

struct ModelOpts {
  int n = 16;
  double alpha = 0.0;
  double eta = 0.0;
  bool spikeless = false;

  void add(CLI::App* app, bool need_n = true) {
    if (need_n) app->add_option("--n", n, "qubit count")->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "spike height exponent, in [0,1)");
    app->add_option("--eta", eta, "spike width exponent, in [0,1)");
    app->add_flag("--spikeless", spikeless, "use the plain Hamming-weight cost");
  }
};

int cmd_gap_scan(const ModelOpts& m, const std::vector<int>& ns, int points, bool curves, const std::string& out_dir,
                 std::ostream& out) {
  if (ns.empty()) throw DomainError("--ns needs at least one n");
  json cfg = {{"command", "gap-scan"}, {"alpha", m.alpha}, {"eta", m.eta}, {"spikeless", m.spikeless},
              {"ns", ns}, {"points", points}};
  const Provenance prov(cfg);
  const auto grid = default_s_grid(points);
  const auto scans = parallel_map<GapScan>(ns.size(), worker_count_from_env(), [&](std::size_t i) {
    return min_gap_scan(params_of(ns[i], m.alpha, m.eta, m.spikeless), grid, mode_of(m.spikeless));
  });
  std::ostringstream csv;
  csv << prov.csv_header() << "n,delta_min,s_star\n";
  for (std::size_t i = 0; i < ns.size(); ++i) csv << ns[i] << ',' << fmt(scans[i].delta_min) << ',' << fmt(scans[i].s_star) << '\n';
  write_file(out_dir, "gap_scan.csv", csv.str());
  if (curves) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
      std::ostringstream c;
      c << prov.csv_header() << "s,gap\n";
      for (const auto& pt : scans[i].curve) c << fmt(pt.s) << ',' << fmt(pt.gap) << '\n';
      write_file(out_dir, "gap_curve_n" + std::to_string(ns[i]) + ".csv", c.str());
    }
  }
  out << csv.str();
  return 0;
}

int cmd_gibbs(const ModelOpts& m, double s, double beta, const std::string& out_dir, std::ostream& out) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("s must lie in [0, 1]");
  if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
  const SpikeParams p = params_of(m.n, m.alpha, m.eta, m.spikeless);
  const CostMode mode = mode_of(m.spikeless);
  json cfg = model_json(m.n, m.alpha, m.eta, m.spikeless);
  cfg["command"] = "gibbs";
  cfg["s"] = s;
  cfg["beta"] = beta;
  const Provenance prov(cfg);

  const WeightDistribution sector = sector_gibbs_marginal(p, s, beta, mode);
  const bool dense_ok = p.n <= kDenseMaxQubits;
  WeightDistribution dense;
  if (dense_ok) dense = dense_gibbs_marginal(p, s, beta, mode);

  std::ostringstream csv;
  csv << prov.csv_header() << (dense_ok ? "k,sector,dense\n" : "k,sector\n");
  for (int k = 0; k <= p.n; ++k) {
    csv << k << ',' << fmt(sector.probs[static_cast<std::size_t>(k)]);
    if (dense_ok) csv << ',' << fmt(dense.probs[static_cast<std::size_t>(k)]);
    csv << '\n';
  }
  write_file(out_dir, "gibbs_marginal.csv", csv.str());

  const double gap = symmetric_ground_and_gap(p, s, mode).gap;
  const ThermalErrorBounds b = thermal_error_bounds(p.n, gap, beta);
  ojson rep = prov.meta();
  rep["symmetric_gap"] = gap;
  rep["trace_distance_space"] = dense_ok ? "full" : "symmetric_sector";
  rep["trace_distance"] = tv_to_ground(p, s, beta, mode, dense_ok ? ThermalSpace::Full : ThermalSpace::SymmetricSector);
  rep["bound_lower"] = b.lower;
  rep["bound_upper"] = b.upper;
  rep["bound_log_upper"] = b.log_upper;
  rep["bound_sector_upper"] = b.sector_upper;
  if (dense_ok) rep["sector_vs_dense_tv"] = tv_distance(sector.probs, dense.probs);
  write_file(out_dir, "gibbs.json", rep.dump(2) + "\n");
  out << rep.dump(2) << '\n';
  return 0;
}

int cmd_pimc_validate(const ModelOpts& m, int L, double s, double beta, std::int64_t steps, double tv_tol,
                      std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
  const SpikeParams p = params_of(m.n, m.alpha, m.eta, m.spikeless);
  const PimcConfig cfgc(p, beta, L, s, mode_of(m.spikeless));
  if (cfgc.sites() > kTransitionMaxSites) throw DomainError("pimc-validate needs nL <= 14");
  json cfg = model_json(m.n, m.alpha, m.eta, m.spikeless);
  cfg["command"] = "pimc-validate";
  cfg["L"] = L;
  cfg["s"] = s;
  cfg["beta"] = beta;
  cfg["steps"] = steps;
  cfg["tv_tol"] = tv_tol;
  cfg["seed"] = seed;
  const Provenance prov(cfg);

  const std::vector<double> pi = enumerate_pi(cfgc);
  const TransitionMatrix P = transition_matrix(cfgc);
  double db = 0.0, row = 0.0, min_diag = 1.0;
  for (std::uint64_t x = 0; x < P.dim; ++x) {
    row = std::max(row, std::abs(P.row_sum(x) - 1.0));
    min_diag = std::min(min_diag, P.diagonal[x]);
    for (int k = 0; k < P.sites; ++k) {
      const std::uint64_t y = x ^ (1ULL << k);
      db = std::max(db, std::abs(pi[x] * P(x, k) - pi[y] * P(y, k)));
    }
  }

  double tv = 0.0;
  bool caches_ok = true;
  if (steps > 0) {
    Rng rng(seed);
    WorldlineState st = WorldlineState::random(p, L, rng);
    std::vector<double> counts(pi.size(), 0.0);
    for (std::int64_t t = 0; t < steps; ++t) {
      metropolis_step(st, cfgc, rng);
      counts[config_index(st)] += 1.0;
    }
    caches_ok = st.caches_consistent();
    for (double& c : counts) c /= static_cast<double>(steps);
    tv = tv_distance(counts, pi);
  }
  const double gap = chain_spectral_gap(P);

  const bool pass = db <= 1e-12 && row <= 1e-12 && min_diag >= 0.5 && caches_ok && (steps == 0 || tv <= tv_tol);
  ojson rep = prov.meta();
  rep["states"] = P.dim;
  rep["detailed_balance_max_violation"] = db;
  rep["row_sum_max_error"] = row;
  rep["min_diagonal"] = min_diag;
  rep["spectral_gap"] = gap;
  rep["empirical_tv"] = tv;
  rep["caches_consistent"] = caches_ok;
  rep["pass"] = pass;
  write_file(out_dir, "pimc_validate.json", rep.dump(2) + "\n");
  out << rep.dump(2) << '\n';
  if (!pass) throw InternalError("pimc-validate checks failed");
  return 0;
}

struct SqaOpts {
  double c_beta = 1.0, c_L = 1.0, c_s = 1.0, sweeps = 10.0, burn_in = 5.0;
  double beta = 0.0;
  int L = 0;
};

int cmd_sqa_run(const ModelOpts& m, const SqaOpts& o, std::uint64_t seed, int runs, const std::string& out_dir,
                std::ostream& out) {
  if (runs < 1) throw DomainError("--runs must be >= 1");
  const SpikeParams p = params_of(m.n, m.alpha, m.eta, m.spikeless);
  const CostMode mode = mode_of(m.spikeless);
  SqaKnobs base = default_sqa_knobs(p, mode, seed, o.c_beta, o.c_L, o.c_s, o.sweeps);
  if (o.beta > 0.0 || o.L > 0) {
    const double beta = o.beta > 0.0 ? o.beta : base.schedule.beta;
    const int L = o.L > 0 ? o.L : default_slice_count(p.n, beta, o.c_L);
    base.schedule = build_schedule(p.n, beta, L, o.c_s, o.sweeps);
  }
  base.burn_in_sweeps = o.burn_in;
  json cfg = model_json(m.n, m.alpha, m.eta, m.spikeless);
  cfg["command"] = "sqa-run";
  cfg["c_beta"] = o.c_beta;
  cfg["c_L"] = o.c_L;
  cfg["c_s"] = o.c_s;
  cfg["sweeps"] = o.sweeps;
  cfg["burn_in"] = o.burn_in;
  cfg["beta"] = base.schedule.beta;
  cfg["L"] = base.schedule.slices;
  cfg["seed"] = seed;
  cfg["runs"] = runs;
  const Provenance prov(cfg);

  const auto reports = parallel_map<RunReport>(static_cast<std::size_t>(runs), worker_count_from_env(), [&](std::size_t i) {
    SqaKnobs k = base;
    k.seed = runs == 1 ? seed : derive_seed(seed, i);
    return run_sqa(p, k);
  });
  ojson rep = prov.meta();
  rep["delta_s"] = base.schedule.delta_s;
  rep["schedule_points"] = base.schedule.s_values.size();
  rep["steps_per_s"] = base.schedule.steps_per_s;
  rep["step_budget"] = sqa_step_budget(p, base);
  std::ostringstream summary;
  summary << prov.csv_header() << "run,seed,final_weight,best_weight_seen,success\n";
  std::ostringstream stages;
  stages << prov.csv_header() << "run,s,steps,acceptance_rate,mean_weight,mean_spike_time,min_slice_weight\n";
  int successes = 0;
  auto& arr = rep["reports"] = ojson::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const RunReport& r = reports[i];
    arr.push_back(ojson::parse(report_to_json(r)));
    successes += r.final_success() ? 1 : 0;
    summary << i << ',' << r.seed << ',' << r.final_weight << ',' << r.best_weight_seen << ',' << (r.final_success() ? 1 : 0) << '\n';
    for (const auto& st : r.stages) {
      stages << i << ',' << fmt(st.knob) << ',' << st.steps << ',' << fmt(st.acceptance_rate) << ',' << fmt(st.mean_weight)
             << ',' << fmt(st.mean_spike_time) << ',' << st.min_slice_weight << '\n';
    }
  }
  rep["success_rate"] = static_cast<double>(successes) / runs;
  write_file(out_dir, "sqa_report.json", rep.dump(2) + "\n");
  write_file(out_dir, "sqa_summary.csv", summary.str());
  write_file(out_dir, "sqa_stages.csv", stages.str());
  out << "sqa-run: " << successes << "/" << runs << " runs ended at weight 0 (beta=" << fmt(base.schedule.beta)
      << ", L=" << base.schedule.slices << ", points=" << base.schedule.s_values.size() << ")\n";
  return 0;
}

int cmd_sa_run(const ModelOpts& m, std::int64_t steps_per_beta, std::int64_t budget, int stages, double beta0,
               double beta_max, std::uint64_t seed, int runs, const std::string& out_dir, std::ostream& out) {
  if (runs < 1) throw DomainError("--runs must be >= 1");
  if (stages < 1) throw DomainError("--stages must be >= 1");
  const SpikeParams p = params_of(m.n, m.alpha, m.eta, m.spikeless);
  if (budget > 0) steps_per_beta = std::max<std::int64_t>(1, budget / stages);
  if (beta_max <= 0.0) beta_max = 2.0 * p.n;
  SaConfig base;
  base.params = p;
  base.mode = mode_of(m.spikeless);
  base.beta_schedule = geometric_beta_schedule(beta0, beta_max, stages);
  base.steps_per_beta = steps_per_beta;
  json cfg = model_json(m.n, m.alpha, m.eta, m.spikeless);
  cfg["command"] = "sa-run";
  cfg["steps_per_beta"] = steps_per_beta;
  cfg["stages"] = stages;
  cfg["beta0"] = beta0;
  cfg["beta_max"] = beta_max;
  cfg["seed"] = seed;
  cfg["runs"] = runs;
  const Provenance prov(cfg);

  const auto reports = parallel_map<RunReport>(static_cast<std::size_t>(runs), worker_count_from_env(), [&](std::size_t i) {
    SaConfig c = base;
    c.seed = runs == 1 ? seed : derive_seed(seed, i);
    return run_sa(c);
  });
  ojson rep = prov.meta();
  std::ostringstream summary;
  summary << prov.csv_header() << "run,seed,final_weight,best_weight_seen,success\n";
  std::ostringstream st_csv;
  st_csv << prov.csv_header() << "run,beta,steps,acceptance_rate,mean_weight,final_weight\n";
  int successes = 0;
  auto& arr = rep["reports"] = ojson::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const RunReport& r = reports[i];
    arr.push_back(ojson::parse(report_to_json(r)));
    successes += r.final_success() ? 1 : 0;
    summary << i << ',' << r.seed << ',' << r.final_weight << ',' << r.best_weight_seen << ',' << (r.final_success() ? 1 : 0) << '\n';
    for (const auto& st : r.stages) {
      st_csv << i << ',' << fmt(st.knob) << ',' << st.steps << ',' << fmt(st.acceptance_rate) << ',' << fmt(st.mean_weight) << ','
             << st.min_slice_weight << '\n';
    }
  }
  rep["success_rate"] = static_cast<double>(successes) / runs;
  write_file(out_dir, "sa_report.json", rep.dump(2) + "\n");
  write_file(out_dir, "sa_summary.csv", summary.str());
  write_file(out_dir, "sa_stages.csv", st_csv.str());
  out << "sa-run: " << successes << "/" << runs << " runs ended at weight 0\n";
  return 0;
}

struct SpikeTimeOpts {
  double beta = 0.0, c_beta = 0.1, c_L = 0.02;
  int L = 0;
  double s = -1.0;
  int scan_points = 41;
  std::int64_t samples = 20000, thinning = 0, burn_in = 0;
  std::vector<double> thetas{0.1, 0.5, 0.9};
  std::vector<double> lambdas;
  int m_max = 5;
  bool exact = true;
};

int cmd_spike_time(const ModelOpts& m, const SpikeTimeOpts& o, std::uint64_t seed, const std::string& out_dir,
                   std::ostream& out) {
  // Spike-time statistics are taken under the spike-less chain.
  const SpikeParams p = params_of(m.n, m.alpha, m.eta, false);
  const double beta = o.beta > 0.0 ? o.beta : default_beta(p, o.c_beta);
  const int L = o.L > 0 ? o.L : default_slice_count(p.n, beta, o.c_L);
  double s = o.s;
  WorstCaseS wc;
  if (s < 0.0) {
    if (o.scan_points < 2) throw DomainError("--scan-points must be >= 2");
    std::vector<double> grid;
    for (int i = 0; i < o.scan_points; ++i) grid.push_back(static_cast<double>(i) / (o.scan_points - 1));
    wc = worst_case_s(p, beta, L, CostMode::Spikeless, grid);
    s = wc.s;
  }
  const PimcConfig cfgc(p, beta, L, s, CostMode::Spikeless);
  const std::int64_t thinning = o.thinning > 0 ? o.thinning : cfgc.sites();
  const std::int64_t burn_in = o.burn_in > 0 ? o.burn_in : 100 * cfgc.sites();
  std::vector<double> lambdas = o.lambdas;
  if (lambdas.empty()) {
    lambdas.push_back(std::pow(static_cast<double>(p.n), 0.5 - p.eta) / L);
    lambdas.push_back(std::pow(static_cast<double>(p.n), p.alpha) * beta * std::log(static_cast<double>(p.n)));
  }

  json cfg = model_json(m.n, m.alpha, m.eta, true);
  cfg["command"] = "spike-time";
  cfg["beta"] = beta;
  cfg["L"] = L;
  cfg["s"] = s;
  cfg["samples"] = o.samples;
  cfg["thinning"] = thinning;
  cfg["burn_in"] = burn_in;
  cfg["thetas"] = o.thetas;
  cfg["lambdas"] = lambdas;
  cfg["m_max"] = o.m_max;
  cfg["seed"] = seed;
  const Provenance prov(cfg);

  Rng rng(seed);
  WorldlineState state = WorldlineState::random(p, L, rng);
  const SpikeTimeStats st = collect_spike_times(state, cfgc, burn_in, o.samples, thinning, rng, o.m_max);
  std::vector<double> exact;
  if (o.exact) exact = exact_spike_time_distribution(cfgc);

  std::ostringstream bounds;
  bounds << prov.csv_header() << "n,L,beta,s,theta,lambda,bound_log,empirical_log,stderr\n";
  for (double theta : o.thetas) {
    const double b = st_threshold(theta, cfgc);
    std::vector<double> ind(st.samples.size());
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < ind.size(); ++i) {
      ind[i] = static_cast<double>(st.samples[i]) >= b ? 1.0 : 0.0;
      hits += static_cast<std::int64_t>(ind[i]);
    }
    const double prob = static_cast<double>(hits) / static_cast<double>(ind.size());
    const double se = batch_means_stderr(ind, st.batch_size);
    for (double lambda : lambdas) {
      const BoundReport br = mgf_chernoff_bound(lambda, theta, cfgc);
      bounds << p.n << ',' << L << ',' << fmt(beta) << ',' << fmt(s) << ',' << fmt(theta) << ',' << fmt(lambda) << ','
             << fmt(br.chernoff_bound) << ',' << (hits > 0 ? fmt(std::log(prob)) : "-inf") << ',' << fmt(se) << '\n';
    }
  }
  write_file(out_dir, "spike_time_bounds.csv", bounds.str());

  std::ostringstream mom;
  mom << prov.csv_header() << "m,empirical,stderr,bound_log" << (o.exact ? ",exact" : "") << '\n';
  for (int mm = 1; mm <= o.m_max; ++mm) {
    mom << mm << ',' << fmt(st.moments[static_cast<std::size_t>(mm)]) << ',' << fmt(st.moment_stderr[static_cast<std::size_t>(mm)])
        << ',' << fmt(moment_bound(mm, L, p.n, p.eta));
    if (o.exact) {
      double e = 0.0;
      for (std::size_t k = 0; k < exact.size(); ++k) e += std::pow(static_cast<double>(k), mm) * exact[k];
      mom << ',' << fmt(e);
    }
    mom << '\n';
  }
  write_file(out_dir, "spike_time_moments.csv", mom.str());

  ojson rep = prov.meta();
  rep["s_worst_case_scan"] = !wc.s_grid.empty();
  rep["mean"] = st.mean;
  rep["variance"] = st.variance;
  rep["n_effective"] = st.n_effective;
  rep["scale"] = L * std::pow(static_cast<double>(p.n), p.eta - 0.5);
  if (!exact.empty()) rep["exact_distribution"] = exact;
  write_file(out_dir, "spike_time.json", rep.dump(2) + "\n");
  out << "spike-time: s=" << fmt(s) << " L=" << L << " beta=" << fmt(beta) << " mean ST=" << fmt(st.mean) << " (scale L n^(eta-1/2) = "
      << fmt(L * std::pow(static_cast<double>(p.n), p.eta - 0.5)) << ")\n";
  return 0;
}

int cmd_fit(const std::string& input, const std::string& xcol, const std::string& ycol, double stretch,
            const std::string& out_dir, std::ostream& out) {
  std::ifstream f(input);
  if (!f) throw DomainError("cannot open " + input);
  std::string line;
  std::vector<std::string> header;
  std::vector<double> xs, ys;
  int xi = -1, yi = -1;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == xcol) xi = static_cast<int>(i);
        if (header[i] == ycol) yi = static_cast<int>(i);
      }
      if (xi < 0 || yi < 0) throw DomainError("columns '" + xcol + "' and '" + ycol + "' must both exist in " + input);
      continue;
    }
    if (static_cast<int>(cells.size()) <= std::max(xi, yi)) throw DomainError("short row in " + input);
    try {
      xs.push_back(std::stod(cells[static_cast<std::size_t>(xi)]));
      ys.push_back(std::stod(cells[static_cast<std::size_t>(yi)]));
    } catch (const std::exception&) {
      throw DomainError("non-numeric value in " + input);
    }
  }
  LinearFit fit;
  std::string model;
  if (stretch > 0.0) {
    std::vector<double> u, v;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("fit: inputs must be positive");
      u.push_back(std::pow(xs[i], stretch));
      v.push_back(std::log(ys[i]));
    }
    fit = linear_fit(u, v);
    model = "log y = a + b x^stretch";
  } else {
    fit = fit_gap_exponent(xs, ys);
    model = "log y = a + b log x";
  }
  json cfg = {{"command", "fit"}, {"input", input}, {"x", xcol}, {"y", ycol}, {"stretch", stretch}};
  const Provenance prov(cfg);
  ojson rep = prov.meta();
  rep["model"] = model;
  rep["points"] = xs.size();
  rep["slope"] = fit.slope;
  rep["intercept"] = fit.intercept;
  rep["r_squared"] = fit.r_squared;
  write_file(out_dir, "fit.json", rep.dump(2) + "\n");
  out << rep.dump(2) << '\n';
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  try {
    const std::vector<std::string> args = merge_json_config(raw_args);
    CLI::App app{"Simulated quantum annealing on the spike cost, with exact oracles", "sqa"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    app.add_option("--config", "JSON file whose keys are used as flag defaults");

    auto common = [&](CLI::App* sub) {
      sub->add_option("--out", out_dir, "output directory");
    };

    ModelOpts gm;
    std::vector<int> ns;
    int points = 512;
    bool curves = false;
    auto* gap = app.add_subcommand("gap-scan", "minimum symmetric-sector gap over an n ladder");
    gm.add(gap, false);
    gap->add_option("--ns", ns, "comma-separated n values")->delimiter(',')->required();
    gap->add_option("--points", points, "uniform s grid size before refinement");
    gap->add_flag("--curves", curves, "also write the sampled gap curve of every n");
    common(gap);

    ModelOpts bm;
    double gs = 0.5, gbeta = 1.0;
    auto* gibbs = app.add_subcommand("gibbs", "exact thermal marginals and thermal-error bounds");
    bm.add(gibbs);
    gibbs->add_option("--s", gs, "adiabatic parameter");
    gibbs->add_option("--beta", gbeta, "inverse temperature");
    common(gibbs);

    ModelOpts pm;
    pm.n = 2;
    int pL = 3;
    double ps = 0.5, pbeta = 1.0, ptv = 0.01;
    std::int64_t psteps = 10'000'000;
    auto* pv = app.add_subcommand("pimc-validate", "enumeration, detailed balance and chain checks on a tiny instance");
    pm.add(pv);
    pv->add_option("--L", pL, "time slices");
    pv->add_option("--s", ps, "adiabatic parameter");
    pv->add_option("--beta", pbeta, "inverse temperature");
    pv->add_option("--steps", psteps, "chain steps for the empirical distribution (0 skips it)");
    pv->add_option("--tv-tol", ptv, "pass threshold for the empirical TV distance");
    pv->add_option("--seed", seed, "master seed");
    common(pv);

    ModelOpts sm;
    SqaOpts so;
    int sruns = 1;
    auto* sq = app.add_subcommand("sqa-run", "simulated quantum annealing runs");
    sm.add(sq);
    sq->add_option("--c-beta", so.c_beta, "beta = c n^(1/2+alpha+eta)");
    sq->add_option("--c-L", so.c_L, "L = max(2, ceil(c n^2 beta^(3/2)))");
    sq->add_option("--c-s", so.c_s, "delta_s = c / (n beta (1 + ln n))");
    sq->add_option("--sweeps", so.sweeps, "sweep units per s value");
    sq->add_option("--burn-in", so.burn_in, "sweep units at s = 0 before the schedule");
    sq->add_option("--beta", so.beta, "explicit beta (overrides --c-beta)");
    sq->add_option("--L", so.L, "explicit slice count (overrides --c-L)");
    sq->add_option("--seed", seed, "master seed");
    sq->add_option("--runs", sruns, "independent runs with derived seeds");
    common(sq);

    ModelOpts am;
    std::int64_t spb = 1000, budget = 0;
    int stages = 100;
    double beta0 = 0.1, beta_max = 0.0;
    int aruns = 1;
    auto* sa = app.add_subcommand("sa-run", "classical simulated annealing baseline");
    am.add(sa);
    sa->add_option("--steps-per-beta", spb, "proposals per temperature stage");
    sa->add_option("--budget", budget, "total proposals (overrides --steps-per-beta)");
    sa->add_option("--stages", stages, "number of geometric temperature stages");
    sa->add_option("--beta0", beta0, "first inverse temperature");
    sa->add_option("--beta-max", beta_max, "last inverse temperature (default 2n)");
    sa->add_option("--seed", seed, "master seed");
    sa->add_option("--runs", aruns, "independent runs with derived seeds");
    common(sa);

    ModelOpts tm;
    SpikeTimeOpts to;
    auto* stc = app.add_subcommand("spike-time", "spike-time statistics and bounds under the spike-less chain");
    tm.add(stc);
    stc->add_option("--beta", to.beta, "explicit beta (overrides --c-beta)");
    stc->add_option("--c-beta", to.c_beta, "beta multiplier");
    stc->add_option("--L", to.L, "explicit slice count (overrides --c-L)");
    stc->add_option("--c-L", to.c_L, "slice multiplier");
    stc->add_option("--s", to.s, "adiabatic parameter; negative scans for the largest mean spike time");
    stc->add_option("--scan-points", to.scan_points, "s grid size of the scan");
    stc->add_option("--samples", to.samples, "spike-time samples");
    stc->add_option("--thinning", to.thinning, "proposals between samples (default nL)");
    stc->add_option("--burn-in", to.burn_in, "proposals before sampling (default 100 nL)");
    stc->add_option("--thetas", to.thetas, "threshold parameters")->delimiter(',');
    stc->add_option("--lambdas", to.lambdas, "MGF parameters")->delimiter(',');
    stc->add_option("--m-max", to.m_max, "highest moment");
    stc->add_option("--exact", to.exact, "also compute the exact spike-time law");
    stc->add_option("--seed", seed, "master seed");
    common(stc);

    std::string input, xcol = "n", ycol = "delta_min";
    double stretch = 0.0;
    auto* fit = app.add_subcommand("fit", "least-squares exponent fit from a CSV file");
    fit->add_option("--input", input, "CSV file")->required();
    fit->add_option("--x", xcol, "x column");
    fit->add_option("--y", ycol, "y column");
    fit->add_option("--stretch", stretch, "fit log y against x^stretch instead of log x");
    common(fit);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
      app.parse(rev);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 1;
    }

    if (gap->parsed()) return cmd_gap_scan(gm, ns, points, curves, out_dir, out);
    if (gibbs->parsed()) return cmd_gibbs(bm, gs, gbeta, out_dir, out);
    if (pv->parsed()) return cmd_pimc_validate(pm, pL, ps, pbeta, psteps, ptv, seed, out_dir, out);
    if (sq->parsed()) return cmd_sqa_run(sm, so, seed, sruns, out_dir, out);
    if (sa->parsed()) return cmd_sa_run(am, spb, budget, stages, beta0, beta_max, seed, aruns, out_dir, out);
    if (stc->parsed()) return cmd_spike_time(tm, to, seed, out_dir, out);
    if (fit->parsed()) return cmd_fit(input, xcol, ycol, stretch, out_dir, out);
    err << app.help();
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sqa
