#include "dfrc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dfrc {

Architecture architecture_from_string(const std::string& s) {
  if (s == "FC") return Architecture::FC;
  if (s == "FixSPS") return Architecture::FixSPS;
  if (s == "FixDPS") return Architecture::FixDPS;
  if (s == "DymSPS") return Architecture::DymSPS;
  if (s == "DymDPS") return Architecture::DymDPS;
  throw ConfigError("unknown architecture: " + s);
}

ChannelModel channel_model_from_string(const std::string& s) {
  if (s == "iid-rayleigh") return ChannelModel::IidRayleigh;
  if (s == "geometric") return ChannelModel::Geometric;
  throw ConfigError("unknown channel model: " + s);
}

const char* to_string(ChannelModel m) {
  return m == ChannelModel::IidRayleigh ? "iid-rayleigh" : "geometric";
}

std::vector<std::string> validate_config(const ScenarioConfig& cfg) {
  std::vector<std::string> errs;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  require(cfg.n_tx >= 1, "n_tx must be a positive integer");
  require(cfg.n_rx >= 1, "n_rx must be a positive integer");
  require(cfg.n_users >= 1, "n_users must be a positive integer");
  require(cfg.n_rf >= 1, "n_rf must be a positive integer");
  require(cfg.n_slots >= 1, "n_slots must be a positive integer");
  require(cfg.n_rf <= cfg.n_tx, "n_rf must not exceed n_tx");
  require(cfg.n_users <= cfg.n_rf, "n_users must not exceed n_rf");
  require(cfg.power_budget > 0.0, "power_budget must be strictly positive");
  require(static_cast<int>(cfg.qos_thresholds.size()) == cfg.n_users,
          "qos_thresholds length must equal n_users");
  require(static_cast<int>(cfg.comm_noise_vars.size()) == cfg.n_users,
          "comm_noise_vars length must equal n_users");
  require(cfg.clutter_angles.size() == cfg.clutter_rcs_vars.size(),
          "clutter_angles and clutter_rcs_vars lengths must match");
  for (double g : cfg.qos_thresholds)
    require(g >= 0.0 && std::isfinite(g), "qos_thresholds entries must be >= 0");
  for (double v : cfg.comm_noise_vars)
    require(v > 0.0 && std::isfinite(v), "comm_noise_vars entries must be strictly positive");
  require(cfg.radar_noise_var > 0.0 && std::isfinite(cfg.radar_noise_var),
          "radar_noise_var must be strictly positive");
  require(cfg.target_rcs_var > 0.0 && std::isfinite(cfg.target_rcs_var),
          "target_rcs_var must be strictly positive");
  for (double v : cfg.clutter_rcs_vars)
    require(v > 0.0 && std::isfinite(v), "clutter_rcs_vars entries must be strictly positive");
  require(cfg.spacing_factor > 0.0, "spacing_factor must be strictly positive");
  require(cfg.power_model.p_rf >= 0.0, "power_model.p_rf must be nonnegative");
  require(cfg.power_model.p_bb >= 0.0, "power_model.p_bb must be nonnegative");
  require(cfg.power_model.p_ps >= 0.0, "power_model.p_ps must be nonnegative");
  require(cfg.power_model.p_sw >= 0.0, "power_model.p_sw must be nonnegative");
  return errs;
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.n_tx = 32;
  cfg.n_rx = 4;
  cfg.n_users = 4;
  cfg.n_rf = 4;
  cfg.n_slots = 8;
  cfg.power_budget = 1.0;
  cfg.qos_thresholds.assign(4, 5.0);
  // SNR_u = P / sigma^2_{c,u} = 15 dB
  cfg.comm_noise_vars.assign(4, std::pow(10.0, -1.5));
  cfg.radar_noise_var = 1.0;      // 0 dB
  cfg.target_angle = 0.0;
  cfg.target_rcs_var = 100.0;     // 20 dB
  cfg.clutter_angles = {-50.0 * M_PI / 180.0, -10.0 * M_PI / 180.0, 40.0 * M_PI / 180.0};
  cfg.clutter_rcs_vars = {1000.0, 1000.0, 1000.0};  // 30 dB
  cfg.power_model = {0.3, 0.2, 0.05, 0.005};
  cfg.spacing_factor = 1.0;
  cfg.rng_seed = 1;
  return cfg;
}

VecC steering_vector(double angle, int n, double spacing_factor) {
  VecC a(n);
  const double scale = std::sqrt(1.0 / n);
  const double step = 2.0 * M_PI * spacing_factor * std::sin(angle);
  for (int m = 0; m < n; ++m) a(m) = std::polar(scale, -step * m);
  return a;
}

RadarChannel radar_channel(double angle, int n_rx, int n_tx, double spacing_factor) {
  return {steering_vector(angle, n_rx, spacing_factor),
          steering_vector(angle, n_tx, spacing_factor)};
}

VecC geometric_channel_from_paths(const VecC& gains, const VecR& angles, int n_tx,
                                  double spacing_factor) {
  VecC h = VecC::Zero(n_tx);
  for (int p = 0; p < gains.size(); ++p)
    h += gains(p) * steering_vector(angles(p), n_tx, spacing_factor);
  return h * std::sqrt(static_cast<double>(n_tx) / static_cast<double>(gains.size()));
}

CommChannels generate_comm_channels(const ScenarioConfig& cfg, ChannelModel model, Rng& rng) {
  MatC h(cfg.n_tx, cfg.n_users);
  if (model == ChannelModel::IidRayleigh) {
    for (int u = 0; u < cfg.n_users; ++u)
      for (int i = 0; i < cfg.n_tx; ++i) h(i, u) = rng.cnormal();
  } else {
    constexpr int kPaths = 8;
    for (int u = 0; u < cfg.n_users; ++u) {
      VecC gains(kPaths);
      VecR angles(kPaths);
      for (int p = 0; p < kPaths; ++p) {
        gains(p) = rng.cnormal();
        angles(p) = (rng.uniform() - 0.5) * M_PI;
      }
      h.col(u) = geometric_channel_from_paths(gains, angles, cfg.n_tx, cfg.spacing_factor);
    }
  }
  return {std::move(h)};
}

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double deg_to_rad(double deg) { return deg * M_PI / 180.0; }

std::vector<double> parse_list(const std::string& value, const std::string& key) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream is(v);
  std::vector<double> out;
  double x;
  while (is >> x) out.push_back(x);
  if (!is.eof()) throw ConfigError("malformed numeric list for key " + key);
  if (out.empty()) throw ConfigError("empty list for key " + key);
  return out;
}

double parse_scalar(const std::string& value, const std::string& key) {
  std::istringstream is(value);
  double x;
  if (!(is >> x)) throw ConfigError("malformed number for key " + key);
  std::string rest;
  if (is >> rest) throw ConfigError("trailing tokens for key " + key);
  return x;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  // section -> key -> raw value
  std::map<std::string, std::map<std::string, std::string>> kv;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "power_model")
        throw ConfigError("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value at line " + std::to_string(lineno));
    if (section.empty()) throw ConfigError("key outside of a section at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (kv[section].count(key)) throw ConfigError("duplicate key " + key);
    kv[section][key] = value;
  }

  ScenarioConfig cfg;
  auto& sc = kv["scenario"];
  auto take = [&](std::map<std::string, std::string>& m, const std::string& key,
                  bool required) -> std::string {
    auto it = m.find(key);
    if (it == m.end()) {
      if (required) throw ConfigError("missing required key " + key);
      return "";
    }
    std::string v = it->second;
    m.erase(it);
    return v;
  };

  cfg.n_tx = static_cast<int>(parse_scalar(take(sc, "n_tx", true), "n_tx"));
  cfg.n_rx = static_cast<int>(parse_scalar(take(sc, "n_rx", true), "n_rx"));
  cfg.n_users = static_cast<int>(parse_scalar(take(sc, "n_users", true), "n_users"));
  const std::string nrf = take(sc, "n_rf", false);
  cfg.n_rf = nrf.empty() ? cfg.n_users : static_cast<int>(parse_scalar(nrf, "n_rf"));
  cfg.n_slots = static_cast<int>(parse_scalar(take(sc, "n_slots", true), "n_slots"));
  cfg.power_budget = parse_scalar(take(sc, "power_budget", true), "power_budget");
  cfg.qos_thresholds = parse_list(take(sc, "qos_thresholds", true), "qos_thresholds");
  {
    auto vars = parse_list(take(sc, "comm_noise_vars", true), "comm_noise_vars");
    for (double& v : vars) v = db_to_linear(v);
    cfg.comm_noise_vars = vars;
  }
  cfg.radar_noise_var = db_to_linear(parse_scalar(take(sc, "radar_noise_var", true), "radar_noise_var"));
  cfg.target_angle = deg_to_rad(parse_scalar(take(sc, "target_angle", true), "target_angle"));
  cfg.target_rcs_var = db_to_linear(parse_scalar(take(sc, "target_rcs_var", true), "target_rcs_var"));
  {
    auto ang = parse_list(take(sc, "clutter_angles", true), "clutter_angles");
    for (double& v : ang) v = deg_to_rad(v);
    cfg.clutter_angles = ang;
    auto rcs = parse_list(take(sc, "clutter_rcs_vars", true), "clutter_rcs_vars");
    for (double& v : rcs) v = db_to_linear(v);
    cfg.clutter_rcs_vars = rcs;
  }
  const std::string sf = take(sc, "spacing_factor", false);
  cfg.spacing_factor = sf.empty() ? 1.0 : parse_scalar(sf, "spacing_factor");
  const std::string seed = take(sc, "rng_seed", false);
  cfg.rng_seed = seed.empty() ? 0 : static_cast<std::uint64_t>(parse_scalar(seed, "rng_seed"));
  if (!sc.empty()) throw ConfigError("unknown key in [scenario]: " + sc.begin()->first);

  auto& pm = kv["power_model"];
  cfg.power_model.p_rf = parse_scalar(take(pm, "p_rf", true), "p_rf");
  cfg.power_model.p_bb = parse_scalar(take(pm, "p_bb", true), "p_bb");
  cfg.power_model.p_ps = parse_scalar(take(pm, "p_ps", true), "p_ps");
  cfg.power_model.p_sw = parse_scalar(take(pm, "p_sw", true), "p_sw");
  if (!pm.empty()) throw ConfigError("unknown key in [power_model]: " + pm.begin()->first);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioConfig cfg = parse_config(ss.str());
  auto errs = validate_config(cfg);
  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

std::string canonical_string(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "n_tx=" << cfg.n_tx << ";n_rx=" << cfg.n_rx << ";n_users=" << cfg.n_users
     << ";n_rf=" << cfg.n_rf << ";n_slots=" << cfg.n_slots
     << ";power_budget=" << cfg.power_budget << ";qos=";
  for (double v : cfg.qos_thresholds) os << v << ",";
  os << ";noise=";
  for (double v : cfg.comm_noise_vars) os << v << ",";
  os << ";radar_noise=" << cfg.radar_noise_var << ";target_angle=" << cfg.target_angle
     << ";target_rcs=" << cfg.target_rcs_var << ";clutter_angles=";
  for (double v : cfg.clutter_angles) os << v << ",";
  os << ";clutter_rcs=";
  for (double v : cfg.clutter_rcs_vars) os << v << ",";
  os << ";pm=" << cfg.power_model.p_rf << "," << cfg.power_model.p_bb << ","
     << cfg.power_model.p_ps << "," << cfg.power_model.p_sw
     << ";spacing=" << cfg.spacing_factor << ";seed=" << cfg.rng_seed;
  return os.str();
}

std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dfrc
