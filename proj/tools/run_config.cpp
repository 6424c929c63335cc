#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include "noncelab/errors.hpp"

namespace noncelab::cli {

namespace {

// key, default
const std::vector<std::pair<const char*, const char*>> kKeys = {
    {"curve", "secp521r1"},
    {"variant", "plain"},
    {"multiplier", "ladder"},
    {"seed", "1"},
    {"jobs", "1"},
    {"out", "noncelab-out"},
    // simulator
    {"sim.f_cpu", "1800000"},
    {"sim.mod_ratio", "1/14"},
    {"sim.sample_rate", "2500000"},
    {"sim.samples_per_event", "96"},
    {"sim.noise_sigma", "1"},
    {"sim.snr_scale", "1"},
    {"sim.baseline", "0.2"},
    {"sim.arith_floor", "1"},
    {"sim.addsub_floor", "0.3"},
    {"sim.arith_gain", "0.05"},
    {"sim.pad", "192"},
    {"sim.interruption_prob", "0"},
    {"sim.interruption_min", "192"},
    {"sim.interruption_max", "1536"},
    {"sim.interference", ""},  // start:length:amplitude[;...], fractions of the trace
    {"sim.event_markers", "true"},
    // inputs
    {"key", ""},
    {"traces", ""},
    {"markers", ""},
    {"labels", ""},
    {"model", ""},
    {"signatures", ""},
    {"leaks", ""},
    // sign
    {"sign.count", "1"},
    {"sign.digest", ""},
    {"sign.lab_mode", "false"},
    // simulate
    {"simulate.mode", "scalar"},
    {"simulate.count", "4"},
    // assess
    {"assess.traces_per_class", "1000"},
    // profiling and classification
    {"analysis.profile_traces", "8"},
    {"analysis.poi_count", "100"},
    {"analysis.full_covariance", "false"},
    {"analysis.ridge", "1e-6"},
    // attack and recovery
    {"attack.signatures", "1"},
    {"attack.leak_bits", "300"},
    {"attack.max_tries", "32"},
    {"recover.strategy", "subset_retry"},
    {"recover.max_tries", "16"},
    // lattice success-rate grid
    {"experiment.leak_bits", "300"},
    {"experiment.signatures", "2"},
    {"experiment.error_rates", "0"},
    {"experiment.trials", "100"},
    {"experiment.strategy", "direct"},
    {"experiment.max_tries", "16"},
    {"experiment.timing", "false"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  if (const auto slash = v.find('/'); slash != std::string::npos)
    return to_real(key, v.substr(0, slash)) / to_real(key, v.substr(slash + 1));
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long d = std::stoull(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& [k, v] : kKeys) values_[k] = v;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!has(key)) throw ConfigError("unknown configuration key '" + key + "'");
  values_[key] = value;
  explicit_[key] = value;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(no) + ": expected key = value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

const std::string& RunConfig::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const { return to_real(key, str(key)); }
uint64_t RunConfig::u64(const std::string& key) const { return to_u64(key, str(key)); }

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> RunConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split(str(key), ',')) out.push_back(to_real(key, p));
  if (out.empty()) throw ConfigError("'" + key + "' needs at least one value");
  return out;
}

std::vector<size_t> RunConfig::sizes(const std::string& key) const {
  std::vector<size_t> out;
  for (const auto& p : split(str(key), ',')) out.push_back(static_cast<size_t>(to_u64(key, p)));
  if (out.empty()) throw ConfigError("'" + key + "' needs at least one value");
  return out;
}

SimConfig RunConfig::sim() const {
  SimConfig c;
  c.f_cpu = real("sim.f_cpu");
  c.mod_ratio = real("sim.mod_ratio");
  c.sample_rate = real("sim.sample_rate");
  c.samples_per_event = static_cast<uint32_t>(u64("sim.samples_per_event"));
  c.noise_sigma = real("sim.noise_sigma");
  c.snr_scale = real("sim.snr_scale");
  c.baseline = real("sim.baseline");
  c.arith_floor = real("sim.arith_floor");
  c.addsub_floor = real("sim.addsub_floor");
  c.arith_gain = real("sim.arith_gain");
  c.pad = static_cast<uint32_t>(u64("sim.pad"));
  c.interruption_prob = real("sim.interruption_prob");
  c.interruption_min = static_cast<uint32_t>(u64("sim.interruption_min"));
  c.interruption_max = static_cast<uint32_t>(u64("sim.interruption_max"));
  c.event_markers = flag("sim.event_markers");
  for (const auto& span : split(str("sim.interference"), ';')) {
    const auto f = split(span, ':');
    if (f.size() != 3) throw ConfigError("sim.interference entries are start:length:amplitude");
    c.interference.push_back({to_real("sim.interference", f[0]), to_real("sim.interference", f[1]),
                              to_real("sim.interference", f[2])});
  }
  c.seed = u64("seed");
  c.validate();
  return c;
}

CurveParams RunConfig::curve() const { return resolve_curve(str("curve")); }

ScalarTraceSpec RunConfig::spec(const CurveParams& curve) const {
  ScalarTraceSpec s;
  s.curve = &curve;
  s.multiplier = parse_multiplier(str("multiplier"));
  s.variant.kind = parse_swap_kind(str("variant"));
  return s;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_)
    if (k != "out") out += k + " = " + v + "\n";
  return out;
}

}  // namespace noncelab::cli
