#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "qha/errors.hpp"

namespace qha::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::set<std::string> kScenarioKinds = {
    "schrodinger", "trajectories", "ensemble",          "ck-oracle",
    "kostin",      "validate",     "deterministic-limit"};

// The consumer marks keys as it reads them; leftovers are unknown keys.
class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& path) const { return kv_.count(path) > 0; }

  std::string str(const std::string& path, const std::string& fallback) {
    consumed_.insert(path);
    auto it = kv_.find(path);
    return it == kv_.end() ? fallback : it->second;
  }

  double num(const std::string& path, double fallback) {
    consumed_.insert(path);
    auto it = kv_.find(path);
    if (it == kv_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + path + "' has non-numeric value '" + it->second + "'");
    }
  }

  long integer(const std::string& path, long fallback) {
    const double v = num(path, double(fallback));
    const long n = static_cast<long>(v);
    if (double(n) != v)
      throw ConfigError("config: key '" + path + "' must be an integer");
    return n;
  }

  bool flag(const std::string& path, bool fallback) {
    const std::string v = str(path, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("config: key '" + path + "' must be a boolean, got '" + v + "'");
  }

  void reject_unknown() const {
    for (const auto& [k, v] : kv_)
      if (!consumed_.count(k)) throw ConfigError("config: unknown key '" + k + "'");
  }

  const std::map<std::string, std::string>& raw() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> consumed_;
};

std::map<std::string, std::string> parse_pairs(const std::filesystem::path& file,
                                               const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> kv;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config: cannot open file " + file.string());
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config: malformed section header at line " +
                            std::to_string(line_no));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: expected key=value at line " + std::to_string(line_no));
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(line_no));
      const std::string path = section.empty() ? key : section + "." + key;
      kv[path] = value;
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: override '" + ov + "' is not key=value");
    kv[trim(ov.substr(0, eq))] = trim(ov.substr(eq + 1));
  }
  return kv;
}

ScenarioConfig extract(KeyReader& r) {
  ScenarioConfig c;
  c.raw = r.raw();

  c.kind = r.str("run.kind", "");
  if (!kScenarioKinds.count(c.kind))
    throw ConfigError("config: run.kind must be one of schrodinger|trajectories|ensemble|"
                      "ck-oracle|kostin|deterministic-limit|validate, got '" +
                      c.kind + "'");
  c.out_dir = r.str("run.out", c.out_dir.string());
  c.seed = static_cast<std::uint64_t>(r.integer("run.seed", long(c.seed)));
  if (const char* env = std::getenv("QHA_SEED")) c.seed = std::strtoull(env, nullptr, 10);

  c.q_min = r.num("grid.q_min", c.q_min);
  c.q_max = r.num("grid.q_max", c.q_max);
  c.n_points = int(r.integer("grid.n_points", c.n_points));

  c.potential = r.str("potential.kind", c.potential);
  if (c.potential != "free" && c.potential != "harmonic")
    throw ConfigError("config: potential.kind must be free|harmonic, got '" + c.potential + "'");
  c.omega = r.num("potential.omega", c.omega);

  c.initial = r.str("initial.kind", c.initial);
  if (c.initial != "gaussian" && c.initial != "coherent")
    throw ConfigError("config: initial.kind must be gaussian|coherent, got '" + c.initial + "'");
  c.center = r.num("initial.center", c.center);
  c.width = r.num("initial.width", c.width);
  c.momentum = r.num("initial.momentum", c.momentum);
  c.q0 = r.num("initial.q0", c.q0);
  c.p0 = r.num("initial.p0", c.p0);

  c.dt = r.num("time.dt", c.dt);
  c.n_steps = int(r.integer("time.n_steps", c.n_steps));
  c.snapshot_every = int(r.integer("time.snapshot_every", c.snapshot_every));

  c.k_theta = r.num("noise.k_theta", c.k_theta);
  c.d_pp = r.num("noise.d_pp", c.d_pp);

  c.size = int(r.integer("ensemble.size", c.size));
  const std::string bw = r.str("ensemble.bandwidth", "auto");
  if (bw == "auto") {
    c.bandwidth = 0.0;
  } else {
    try {
      c.bandwidth = std::stod(bw);
    } catch (const std::exception&) {
      throw ConfigError("config: ensemble.bandwidth must be a number or 'auto'");
    }
  }
  c.quantum_force = r.flag("ensemble.quantum_force", c.quantum_force);

  c.beta = r.num("kostin.beta", c.beta);
  c.forcing = r.str("kostin.forcing", c.forcing);
  if (c.forcing != "zero" && c.forcing != "sinusoidal" && c.forcing != "kicks")
    throw ConfigError("config: kostin.forcing must be zero|sinusoidal|kicks, got '" +
                      c.forcing + "'");
  c.forcing_amplitude = r.num("kostin.forcing_amplitude", c.forcing_amplitude);
  c.forcing_frequency = r.num("kostin.forcing_frequency", c.forcing_frequency);
  c.forcing_phase = r.num("kostin.forcing_phase", c.forcing_phase);
  c.kick_variance = r.num("kostin.kick_variance", c.kick_variance);
  c.kick_interval = r.num("kostin.kick_interval", c.kick_interval);

  c.theta_max = r.num("limit.theta_max", c.theta_max);
  c.theta_halvings = int(r.integer("limit.theta_halvings", c.theta_halvings));

  c.level = r.str("validate.level", c.level);
  if (c.level != "quick" && c.level != "full")
    throw ConfigError("config: validate.level must be quick|full, got '" + c.level + "'");

  r.reject_unknown();

  // cross-field checks that the typed layer can express
  if (c.kind != "validate") {
    if (!(c.q_max > c.q_min)) throw ConfigError("config: grid.q_max must exceed grid.q_min");
    if (c.n_points < 16) throw ConfigError("config: grid.n_points must be at least 16");
    if (!(c.dt > 0)) throw ConfigError("config: time.dt must be positive");
    if (c.n_steps < 0) throw ConfigError("config: time.n_steps must be nonnegative");
    if (c.snapshot_every < 1) throw ConfigError("config: time.snapshot_every must be >= 1");
    if (!(c.k_theta >= 0) || !(c.d_pp >= 0))
      throw ConfigError("config: noise amplitudes must be nonnegative");
    if (c.size < 1) throw ConfigError("config: ensemble.size must be positive");
    if (c.kind == "kostin" && c.potential != "harmonic")
      throw ConfigError("config: kostin runs need potential.kind = harmonic");
    if (!(c.beta >= 0)) throw ConfigError("config: kostin.beta must be nonnegative");
    if (c.potential == "harmonic" && !(c.omega > 0))
      throw ConfigError("config: potential.omega must be positive");
    if (!std::isfinite(c.q_min) || !std::isfinite(c.q_max) || !std::isfinite(c.dt))
      throw ConfigError("config: numeric fields must be finite");
  }
  return c;
}

}  // namespace

ScenarioConfig load_config(const std::filesystem::path& file,
                           const std::vector<std::string>& overrides) {
  KeyReader reader(parse_pairs(file, overrides));
  return extract(reader);
}

ScenarioConfig load_config_from_pairs(const std::vector<std::string>& pairs) {
  KeyReader reader(parse_pairs("", pairs));
  return extract(reader);
}

}  // namespace qha::cli
