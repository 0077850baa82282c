#include "dfrc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace dfrc {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string provenance(const ScenarioConfig& cfg, std::uint64_t seed) {
  char buf[120];
  std::snprintf(buf, sizeof(buf), "# provenance: config_hash=%016llx seed=%llu version=%s",
                static_cast<unsigned long long>(fnv1a_hash(canonical_string(cfg))),
                static_cast<unsigned long long>(seed), kVersion);
  return buf;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot write " + path, 1);
  out << contents;
  if (!out) throw RunError("write failed: " + path, 1);
}

json complex_matrix_to_json(const MatC& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatC complex_matrix_from_json(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  MatC m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      m(i, j) = cxd(rows[i][j][0].get<double>(), rows[i][j][1].get<double>());
  return m;
}

json real_matrix_to_json(const MatR& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatR real_matrix_from_json(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  MatR m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

SolveStatus status_from_string(const std::string& s) {
  if (s == "Converged") return SolveStatus::Converged;
  if (s == "MaxIterations") return SolveStatus::MaxIterations;
  if (s == "InfeasibleQoS") return SolveStatus::InfeasibleQoS;
  throw ConfigError("unknown status: " + s);
}

// Deterministic parallel map: results land by index regardless of the
// completion order of the workers.
template <typename Fn>
void parallel_for(int n_tasks, int jobs, Fn&& fn) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(jobs, n_tasks);
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RunError("cannot create output directory " + dir, 1);
}

}  // namespace

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> errs = validate_config(spec.scenario);
  if (spec.architectures.empty()) errs.push_back("architecture list must not be empty");
  if (spec.draws < 1) errs.push_back("draws must be >= 1");
  for (size_t i = 1; i < spec.sweep_values.size(); ++i)
    if (!(spec.sweep_values[i] > spec.sweep_values[i - 1]))
      errs.push_back("sweep values must be strictly increasing");
  if (spec.sweep != SweepVariable::None && spec.sweep_values.empty())
    errs.push_back("sweep requires a nonempty value list");
  if (spec.out_dir.empty()) errs.push_back("output directory must be set");
  if (spec.jobs < 1) errs.push_back("jobs must be >= 1");
  return errs;
}

CommChannels channels_for_draw(const ScenarioConfig& cfg, ChannelModel model,
                               std::uint64_t master_seed, int point, int draw) {
  Rng rng(derive_seed(master_seed, 1000 + point, draw));
  return generate_comm_channels(cfg, model, rng);
}

ScenarioConfig scenario_at(const ExperimentSpec& spec, int point, int draw) {
  ScenarioConfig cfg = spec.scenario;
  if (spec.sweep == SweepVariable::Qos) {
    double g = spec.sweep_values[point];
    if (spec.qos_unit == QosUnit::Bits) g *= M_LN2;
    cfg.qos_thresholds.assign(cfg.n_users, g);
  } else if (spec.sweep == SweepVariable::NTx) {
    cfg.n_tx = static_cast<int>(spec.sweep_values[point]);
  }
  cfg.rng_seed = derive_seed(spec.seed, 1000 + point, draw);
  return cfg;
}

std::string design_to_json(const DesignFile& design) {
  json j;
  j["architecture"] = to_string(design.bf.architecture);
  j["status"] = to_string(design.status);
  j["f_a"] = complex_matrix_to_json(design.bf.f_a);
  j["f_d"] = complex_matrix_to_json(design.bf.f_d);
  if (design.dps.phi1.size() > 0) {
    j["dps_phi1"] = real_matrix_to_json(design.dps.phi1);
    j["dps_phi2"] = real_matrix_to_json(design.dps.phi2);
  }
  json m;
  m["sinr_per_user"] = design.metrics.sinr_per_user;
  m["rate_per_user"] = design.metrics.rate_per_user;
  m["rmi"] = design.metrics.rmi;
  m["p_tol"] = design.metrics.p_tol;
  m["cee"] = design.metrics.cee;
  m["ree"] = design.metrics.ree;
  j["metrics"] = std::move(m);
  j["seed"] = design.seed;
  j["config_hash"] = design.config_hash;
  j["version"] = kVersion;
  return j.dump(2) + "\n";
}

DesignFile design_from_json(const std::string& text) {
  const json j = json::parse(text);
  DesignFile d;
  d.bf.architecture = architecture_from_string(j.at("architecture").get<std::string>());
  d.status = status_from_string(j.at("status").get<std::string>());
  d.bf.f_a = complex_matrix_from_json(j.at("f_a"));
  d.bf.f_d = complex_matrix_from_json(j.at("f_d"));
  if (j.contains("dps_phi1")) {
    d.dps.phi1 = real_matrix_from_json(j.at("dps_phi1"));
    d.dps.phi2 = real_matrix_from_json(j.at("dps_phi2"));
  }
  const json& m = j.at("metrics");
  d.metrics.sinr_per_user = m.at("sinr_per_user").get<std::vector<double>>();
  d.metrics.rate_per_user = m.at("rate_per_user").get<std::vector<double>>();
  d.metrics.rmi = m.at("rmi").get<double>();
  d.metrics.p_tol = m.at("p_tol").get<double>();
  d.metrics.cee = m.at("cee").get<double>();
  d.metrics.ree = m.at("ree").get<double>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.config_hash = j.at("config_hash").get<std::string>();
  return d;
}

DesignFile load_design(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open " + path, 1);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return design_from_json(text);
}

void run_solve(const ExperimentSpec& spec) {
  ensure_out_dir(spec.out_dir);
  ScenarioConfig cfg = spec.scenario;
  cfg.rng_seed = derive_seed(spec.seed, 1000, 0);
  const CommChannels channels = channels_for_draw(cfg, spec.channel_model, spec.seed, 0, 0);

  char hash_buf[20];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(canonical_string(cfg))));

  for (Architecture arch : spec.architectures) {
    const DesignResult res = solve(cfg, channels, arch, spec.solver);
    if (res.status == SolveStatus::InfeasibleQoS) {
      json err;
      err["error"] = "InfeasibleQoS";
      err["architecture"] = to_string(arch);
      err["detail"] = "QoS thresholds exceed what the power budget supports on this channel draw";
      write_file(spec.out_dir + "/error.json", err.dump(2) + "\n");
      throw RunError(err.dump(), 1);
    }

    DesignFile d;
    d.bf = res.bf;
    d.dps = res.dps;
    d.metrics = res.metrics;
    d.status = res.status;
    d.seed = spec.seed;
    d.config_hash = hash_buf;
    write_file(spec.out_dir + "/design_" + to_string(arch) + ".json", design_to_json(d));

    std::string csv = "iteration,al_objective,rmi,min_rate_margin,residual\n";
    for (const TraceRow& row : res.traces) {
      csv += std::to_string(row.iteration) + "," + fmt(row.al_objective) + "," +
             fmt(row.rmi) + "," + fmt(row.min_rate_margin) + "," + fmt(row.residual) + "\n";
    }
    csv += provenance(cfg, spec.seed) + "\n";
    write_file(spec.out_dir + "/trace_" + to_string(arch) + ".csv", csv);
  }
}

void run_sweep(const ExperimentSpec& spec) {
  ensure_out_dir(spec.out_dir);
  const int n_points = spec.sweep == SweepVariable::None
                           ? 1
                           : static_cast<int>(spec.sweep_values.size());
  const int n_arch = static_cast<int>(spec.architectures.size());
  const int n_tasks = n_points * n_arch * spec.draws;

  struct Cell {
    bool ok = false;
    double rmi = 0.0;
    double sum_rate = 0.0;
  };
  std::vector<Cell> cells(n_tasks);

  parallel_for(n_tasks, spec.jobs, [&](int task) {
    const int point = task / (n_arch * spec.draws);
    const int arch_i = (task / spec.draws) % n_arch;
    const int draw = task % spec.draws;
    const ScenarioConfig cfg = scenario_at(spec, point, draw);
    const CommChannels channels =
        channels_for_draw(cfg, spec.channel_model, spec.seed, point, draw);
    const DesignResult res = solve(cfg, channels, spec.architectures[arch_i], spec.solver);
    Cell& cell = cells[task];
    if (res.status == SolveStatus::InfeasibleQoS) return;
    cell.ok = true;
    cell.rmi = res.metrics.rmi;
    for (double r : res.metrics.rate_per_user) cell.sum_rate += r;
  });

  std::string csv = "sweep,architecture,mean_rmi,mean_sum_rate,ree,cee,draws,status\n";
  for (int point = 0; point < n_points; ++point) {
    const double value = spec.sweep == SweepVariable::None ? 0.0 : spec.sweep_values[point];
    for (int a = 0; a < n_arch; ++a) {
      double rmi_sum = 0.0, rate_sum = 0.0;
      int ok = 0;
      for (int d = 0; d < spec.draws; ++d) {
        const Cell& cell = cells[(point * n_arch + a) * spec.draws + d];
        if (!cell.ok) continue;
        ++ok;
        rmi_sum += cell.rmi;
        rate_sum += cell.sum_rate;
      }
      const ScenarioConfig cfg_pt = scenario_at(spec, point, 0);
      const double p_tol = power_consumption(spec.architectures[a], cfg_pt);
      std::string status = ok == spec.draws ? "ok"
                           : ok == 0        ? "failed"
                                            : "partial:" + std::to_string(ok) + "/" +
                                                  std::to_string(spec.draws);
      const double mean_rmi = ok > 0 ? rmi_sum / ok : std::nan("");
      const double mean_rate = ok > 0 ? rate_sum / ok : std::nan("");
      csv += fmt(value) + "," + to_string(spec.architectures[a]) + "," + fmt(mean_rmi) +
             "," + fmt(mean_rate) + "," + fmt(mean_rmi / p_tol) + "," +
             fmt(mean_rate / p_tol) + "," + std::to_string(ok) + "," + status + "\n";
    }
  }
  csv += provenance(spec.scenario, spec.seed) + "\n";
  write_file(spec.out_dir + "/sweep.csv", csv);
}

void run_beampattern(const ExperimentSpec& spec, double angle_min_deg, double angle_max_deg,
                     double angle_step_deg) {
  ensure_out_dir(spec.out_dir);
  ScenarioConfig cfg = spec.scenario;
  cfg.rng_seed = derive_seed(spec.seed, 1000, 0);
  const CommChannels channels = channels_for_draw(cfg, spec.channel_model, spec.seed, 0, 0);

  std::vector<double> grid_deg;
  for (double a = angle_min_deg; a <= angle_max_deg + 1e-12; a += angle_step_deg)
    grid_deg.push_back(a);
  std::vector<double> grid_rad(grid_deg.size());
  for (size_t i = 0; i < grid_deg.size(); ++i) grid_rad[i] = grid_deg[i] * M_PI / 180.0;

  for (Architecture arch : spec.architectures) {
    const DesignResult res = solve(cfg, channels, arch, spec.solver);
    if (res.status == SolveStatus::InfeasibleQoS) {
      json err;
      err["error"] = "InfeasibleQoS";
      err["architecture"] = to_string(arch);
      write_file(spec.out_dir + "/error.json", err.dump(2) + "\n");
      throw RunError(err.dump(), 1);
    }
    const auto pattern = beampattern(res.bf, grid_rad, cfg);
    std::string csv = "angle_deg,gain_db\n";
    for (size_t i = 0; i < pattern.size(); ++i)
      csv += fmt(grid_deg[i]) + "," + fmt(pattern[i].second) + "\n";
    csv += provenance(cfg, spec.seed) + "\n";
    write_file(spec.out_dir + "/beampattern_" + to_string(arch) + ".csv", csv);
  }
}

std::vector<double> default_p_fa_grid() {
  return {0.001, 0.003, 0.01, 0.03, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
}

void run_roc(const ExperimentSpec& spec, long trials, const std::vector<double>& grid_in) {
  ensure_out_dir(spec.out_dir);
  std::vector<double> p_fa_grid;
  for (double v : grid_in)
    if (v > 0.0 && v < 1.0) p_fa_grid.push_back(v);
  std::sort(p_fa_grid.begin(), p_fa_grid.end());
  p_fa_grid.erase(std::unique(p_fa_grid.begin(), p_fa_grid.end()), p_fa_grid.end());
  const int n_arch = static_cast<int>(spec.architectures.size());
  const int n_tasks = n_arch * spec.draws;
  std::vector<std::vector<double>> pd(n_tasks);  // per task: p_d per grid point
  std::vector<bool> ok(n_tasks, false);

  parallel_for(n_tasks, spec.jobs, [&](int task) {
    const int arch_i = task / spec.draws;
    const int draw = task % spec.draws;
    const ScenarioConfig cfg = scenario_at(spec, 0, draw);
    const CommChannels channels =
        channels_for_draw(cfg, spec.channel_model, spec.seed, 0, draw);
    const DesignResult res = solve(cfg, channels, spec.architectures[arch_i], spec.solver);
    if (res.status == SolveStatus::InfeasibleQoS) return;
    Rng rng(derive_seed(spec.seed, 2000 + arch_i, draw));
    const RocCurve curve = roc_curve(res.bf, cfg, trials, p_fa_grid, rng);
    std::vector<double> row;
    for (const auto& [fa, p] : curve.points)
      if (fa > 0.0 && fa < 1.0) row.push_back(p);
    pd[task] = std::move(row);
    ok[task] = true;
  });

  std::string csv = "p_fa,p_d,trials,architecture,seed\n";
  for (int a = 0; a < n_arch; ++a) {
    std::vector<double> mean(p_fa_grid.size(), 0.0);
    int n_ok = 0;
    for (int d = 0; d < spec.draws; ++d) {
      const int task = a * spec.draws + d;
      if (!ok[task]) continue;
      ++n_ok;
      for (size_t i = 0; i < mean.size(); ++i) mean[i] += pd[task][i];
    }
    for (size_t i = 0; i < p_fa_grid.size(); ++i) {
      const double v = n_ok > 0 ? mean[i] / n_ok : std::nan("");
      csv += fmt(p_fa_grid[i]) + "," + fmt(v) + "," + std::to_string(trials) + "," +
             to_string(spec.architectures[a]) + "," + std::to_string(spec.seed) + "\n";
    }
  }
  csv += provenance(spec.scenario, spec.seed) + "\n";
  write_file(spec.out_dir + "/roc.csv", csv);
}

}  // namespace dfrc
