#include "rofso/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rofso/errors.hpp"
#include "rofso/random.hpp"
#include "rofso/text_io.hpp"

namespace rofso {

namespace pt = boost::property_tree;

namespace {

// Drops `; ...` and `# ...` trailing a value. Only a marker preceded by
// whitespace starts a comment, so paths like a#b survive.
std::string strip_inline_comments(std::istream& in) {
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    for (std::size_t k = 1; k < line.size(); ++k) {
      if ((line[k] == ';' || line[k] == '#') && (line[k - 1] == ' ' || line[k - 1] == '\t')) {
        line.erase(k);
        break;
      }
    }
    out += line;
    out += '\n';
  }
  return out;
}

constexpr double kNanometre = 1e-9;

// Reads the keys of one section, remembering which were consumed so the
// leftovers can be reported.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {
    if (tree_) {
      for (const auto& [key, child] : *tree_) {
        if (!child.empty()) {
          throw ConfigError(name_ + "." + key, "nested sections are not supported");
        }
        raw_[key] = child.data();
      }
    }
  }

  bool has(const std::string& key) const { return raw_.count(key) != 0; }

  std::string key(const std::string& k) const { return name_ + "." + k; }

  template <typename T, typename Parse>
  void read(const std::string& k, T& out, Parse parse) {
    const auto it = raw_.find(k);
    if (it == raw_.end()) return;
    try {
      out = parse(std::string(trim(it->second)));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key(k), e.what());
    }
    raw_.erase(it);
  }

  void number(const std::string& k, double& out) {
    read(k, out, [](const std::string& s) { return parse_double(s); });
  }

  template <typename Int>
  void integer(const std::string& k, Int& out) {
    read(k, out, [&](const std::string& s) {
      const long long v = parse_integer(s);
      if (v < 0) throw ConfigError(key(k), "must be nonnegative");
      return static_cast<Int>(v);
    });
  }

  void flag(const std::string& k, bool& out) {
    read(k, out, [&](const std::string& s) {
      if (s == "true" || s == "1" || s == "on") return true;
      if (s == "false" || s == "0" || s == "off") return false;
      throw ConfigError(key(k), "expected true or false");
    });
  }

  void text(const std::string& k, std::string& out) {
    read(k, out, [](const std::string& s) { return s; });
  }

  void list(const std::string& k, std::vector<double>& out) {
    read(k, out, [](const std::string& s) {
      std::vector<double> v;
      for (const auto& f : split_list(s)) v.push_back(parse_double(f));
      return v;
    });
  }

  void schedule(const std::string& base_key, StepSchedule& out) {
    number(base_key, out.base);
    read(base_key + "_schedule", out.kind, [&](const std::string& s) {
      if (s == "constant") return StepSchedule::Kind::constant;
      if (s == "inv_sqrt") return StepSchedule::Kind::inv_sqrt;
      throw ConfigError(key(base_key + "_schedule"), "expected constant or inv_sqrt");
    });
  }

  void finish() const {
    if (!raw_.empty()) {
      throw ConfigError(key(raw_.begin()->first), "unknown key");
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::map<std::string, std::string> raw_;
};

std::string schedule_name(StepSchedule::Kind kind) {
  return kind == StepSchedule::Kind::constant ? "constant" : "inv_sqrt";
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += (i ? ", " : "") + format_double(v[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (m == 0) throw ConfigError("experiment.m", "must be at least 1");
  if (!(p_t > 0.0) || !std::isfinite(p_t)) throw ConfigError("experiment.p_t", "must be positive");
  if (!(p_s > 0.0) || !std::isfinite(p_s)) throw ConfigError("experiment.p_s", "must be positive");
  if (eval_samples == 0) throw ConfigError("experiment.eval_samples", "must be at least 1");
  if (!(feasibility_tol > 0.0)) {
    throw ConfigError("experiment.feasibility_tol", "must be positive");
  }
  if (channel.channels() != m) {
    throw ConfigError("channel.wavelengths_m", "has " + std::to_string(channel.channels()) +
                                                   " entries but m = " + std::to_string(m));
  }
  if (weights.mode == WeightSpec::Mode::explicit_list) {
    if (weights.values.size() != m) {
      throw ConfigError("experiment.weights", "has " + std::to_string(weights.values.size()) +
                                                  " entries but m = " + std::to_string(m));
    }
    for (double w : weights.values) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ConfigError("experiment.weights", "weights must be finite and nonnegative");
      }
    }
  }
  try {
    channel.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("channel." + e.key(), e.what());
  }
  try {
    system.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("system." + e.key(), e.what());
  }
  sdg.validate();
  pddl.validate();
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    std::istringstream cleaned(strip_inline_comments(in));
    pt::read_ini(cleaned, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.message() + " at line " +
                              std::to_string(e.line()));
  }
  for (const auto& [name, child] : tree) {
    if (child.empty() || (name != "experiment" && name != "channel" && name != "system" &&
                          name != "sdg" && name != "pddl")) {
      throw ConfigError(name, "unknown section or key outside a section");
    }
  }
  auto section = [&](const char* name) {
    const auto found = tree.get_child_optional(name);
    return Section(found ? &*found : nullptr, name);
  };

  ExperimentConfig cfg;

  Section ex = section("experiment");
  ex.text("name", cfg.name);
  ex.integer("m", cfg.m);
  ex.number("p_t", cfg.p_t);
  ex.number("p_s", cfg.p_s);
  ex.integer("seed", cfg.seed);
  ex.text("output_dir", cfg.output_dir);
  ex.integer("eval_samples", cfg.eval_samples);
  ex.number("feasibility_tol", cfg.feasibility_tol);
  ex.integer("weight_seed", cfg.weights.seed);
  ex.read("weights", cfg.weights, [&](const std::string& s) {
    WeightSpec w = cfg.weights;
    if (s == "random_uniform_0_1") {
      w.mode = WeightSpec::Mode::random_uniform_0_1;
      w.values.clear();
    } else {
      w.mode = WeightSpec::Mode::explicit_list;
      w.values.clear();
      for (const auto& f : split_list(s)) w.values.push_back(parse_double(f));
    }
    return w;
  });
  ex.finish();

  Section ch = section("channel");
  ch.number("alpha", cfg.channel.alpha);
  ch.number("distance", cfg.channel.distance);
  ch.number("d_tx", cfg.channel.d_tx);
  ch.number("d_rx", cfg.channel.d_rx);
  ch.number("sigma_x2", cfg.channel.sigma_x2);
  ch.number("n0", cfg.channel.n0);
  ch.flag("clamp_gain_to_unity", cfg.channel.clamp_gain_to_unity);
  if (ch.has("guard_band_nm")) {
    if (ch.has("guard_band_m")) {
      throw ConfigError("channel.guard_band_m", "give guard_band_m or guard_band_nm, not both");
    }
    double guard_nm = 0.0;
    ch.number("guard_band_nm", guard_nm);
    cfg.channel.guard_band = guard_nm * kNanometre;
  }
  ch.number("guard_band_m", cfg.channel.guard_band);
  if (ch.has("wavelengths_m")) {
    if (ch.has("wavelength_start_nm") || ch.has("wavelength_step_nm")) {
      throw ConfigError("channel.wavelengths_m",
                        "give either an explicit list or start/step, not both");
    }
    ch.list("wavelengths_m", cfg.channel.wavelengths);
  } else {
    double start_nm = kDefaultFirstWavelength / kNanometre;
    double step_nm = kDefaultWavelengthStep / kNanometre;
    ch.number("wavelength_start_nm", start_nm);
    ch.number("wavelength_step_nm", step_nm);
    cfg.channel.wavelengths = wavelength_grid(cfg.m, start_nm * kNanometre, step_nm * kNanometre);
  }
  ch.finish();

  Section sy = section("system");
  sy.number("omi", cfg.system.omi);
  sy.number("m_p", cfg.system.m_p);
  sy.number("r", cfg.system.r);
  if (sy.has("rin")) {
    if (sy.has("rin_db_hz") || sy.has("noise_bandwidth_hz")) {
      throw ConfigError("system.rin", "give either rin or rin_db_hz/noise_bandwidth_hz");
    }
    sy.number("rin", cfg.system.rin);
  } else {
    double rin_db = -140.0;
    double bandwidth = 1e9;
    sy.number("rin_db_hz", rin_db);
    sy.number("noise_bandwidth_hz", bandwidth);
    cfg.system.rin = rin_from_db(rin_db, bandwidth);
  }
  sy.number("e_charge", cfg.system.e_charge);
  sy.number("f_excess", cfg.system.f_excess);
  sy.number("k_boltz", cfg.system.k_boltz);
  sy.number("temperature", cfg.system.temperature);
  sy.number("r_f", cfg.system.r_f);
  sy.finish();

  Section sd = section("sdg");
  sd.integer("iterations", cfg.sdg.iterations);
  sd.integer("batch_size", cfg.sdg.batch_size);
  sd.schedule("eta", cfg.sdg.eta);
  sd.integer("grid_points", cfg.sdg.grid_points);
  sd.number("refine_tol", cfg.sdg.refine_tol);
  sd.number("lambda0", cfg.sdg.lambda0);
  sd.integer("window", cfg.sdg.window);
  sd.integer("eval_every", cfg.sdg.eval_every);
  sd.finish();

  Section pd = section("pddl");
  pd.integer("iterations", cfg.pddl.iterations);
  pd.integer("batch_size", cfg.pddl.batch_size);
  pd.schedule("delta", cfg.pddl.delta);
  pd.schedule("eta", cfg.pddl.eta);
  pd.number("lambda0", cfg.pddl.lambda0);
  pd.integer("warmup_batches", cfg.pddl.warmup_batches);
  pd.flag("variance_reduction", cfg.pddl.variance_reduction);
  pd.number("baseline_decay", cfg.pddl.baseline_decay);
  pd.read("layers", cfg.pddl.net.layer_sizes, [](const std::string& s) {
    std::vector<std::size_t> sizes;
    for (const auto& f : split_list(s)) {
      const long long v = parse_integer(f);
      if (v <= 0) throw std::invalid_argument("layer sizes must be positive");
      sizes.push_back(static_cast<std::size_t>(v));
    }
    return sizes;
  });
  pd.read("activation", cfg.pddl.net.hidden,
          [](const std::string& s) { return activation_from_string(s); });
  pd.number("sigma_min_frac", cfg.pddl.sigma_min_frac);
  pd.number("sigma_max_frac", cfg.pddl.sigma_max_frac);
  pd.integer("eval_every", cfg.pddl.eval_every);
  pd.integer("max_step_halvings", cfg.pddl.max_step_halvings);
  pd.finish();

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file '" + path.string() + "'");
  }
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto num = [&](const char* key, double v) { kv(key, format_double(v)); };
  auto integer = [&](const char* key, std::uint64_t v) { kv(key, std::to_string(v)); };

  out << "[experiment]\n";
  kv("name", cfg.name);
  integer("m", cfg.m);
  num("p_t", cfg.p_t);
  num("p_s", cfg.p_s);
  integer("seed", cfg.seed);
  kv("weights", cfg.weights.mode == WeightSpec::Mode::random_uniform_0_1
                    ? std::string("random_uniform_0_1")
                    : join_doubles(cfg.weights.values));
  integer("weight_seed", cfg.weights.seed);
  kv("output_dir", cfg.output_dir);
  integer("eval_samples", cfg.eval_samples);
  num("feasibility_tol", cfg.feasibility_tol);

  out << "\n[channel]\n";
  num("alpha", cfg.channel.alpha);
  num("distance", cfg.channel.distance);
  num("d_tx", cfg.channel.d_tx);
  num("d_rx", cfg.channel.d_rx);
  num("sigma_x2", cfg.channel.sigma_x2);
  num("n0", cfg.channel.n0);
  num("guard_band_m", cfg.channel.guard_band);
  kv("clamp_gain_to_unity", cfg.channel.clamp_gain_to_unity ? "true" : "false");
  kv("wavelengths_m", join_doubles(cfg.channel.wavelengths));

  out << "\n[system]\n";
  num("omi", cfg.system.omi);
  num("m_p", cfg.system.m_p);
  num("r", cfg.system.r);
  num("rin", cfg.system.rin);
  num("e_charge", cfg.system.e_charge);
  num("f_excess", cfg.system.f_excess);
  num("k_boltz", cfg.system.k_boltz);
  num("temperature", cfg.system.temperature);
  num("r_f", cfg.system.r_f);

  out << "\n[sdg]\n";
  integer("iterations", cfg.sdg.iterations);
  integer("batch_size", cfg.sdg.batch_size);
  num("eta", cfg.sdg.eta.base);
  kv("eta_schedule", schedule_name(cfg.sdg.eta.kind));
  integer("grid_points", cfg.sdg.grid_points);
  num("refine_tol", cfg.sdg.refine_tol);
  num("lambda0", cfg.sdg.lambda0);
  integer("window", cfg.sdg.window);
  integer("eval_every", cfg.sdg.eval_every);

  out << "\n[pddl]\n";
  integer("iterations", cfg.pddl.iterations);
  integer("batch_size", cfg.pddl.batch_size);
  num("delta", cfg.pddl.delta.base);
  kv("delta_schedule", schedule_name(cfg.pddl.delta.kind));
  num("eta", cfg.pddl.eta.base);
  kv("eta_schedule", schedule_name(cfg.pddl.eta.kind));
  num("lambda0", cfg.pddl.lambda0);
  integer("warmup_batches", cfg.pddl.warmup_batches);
  kv("variance_reduction", cfg.pddl.variance_reduction ? "true" : "false");
  num("baseline_decay", cfg.pddl.baseline_decay);
  std::string layers;
  for (std::size_t l = 0; l < cfg.pddl.net.layer_sizes.size(); ++l) {
    layers += (l ? ", " : "") + std::to_string(cfg.pddl.net.layer_sizes[l]);
  }
  kv("layers", layers);
  kv("activation", to_string(cfg.pddl.net.hidden));
  num("sigma_min_frac", cfg.pddl.sigma_min_frac);
  num("sigma_max_frac", cfg.pddl.sigma_max_frac);
  integer("eval_every", cfg.pddl.eval_every);
  integer("max_step_halvings", cfg.pddl.max_step_halvings);
  return out.str();
}

Weights resolve_weights(const ExperimentConfig& cfg) {
  if (cfg.weights.mode == WeightSpec::Mode::explicit_list) {
    return {cfg.weights.values};
  }
  Rng rng(cfg.weights.seed);
  Weights w;
  w.omega.resize(cfg.m);
  for (double& v : w.omega) v = rng.uniform();
  return w;
}

}  // namespace rofso
