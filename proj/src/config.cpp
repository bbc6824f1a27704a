#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "rephase/runner.hpp"

namespace rephase {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>> allowed_keys = {
    {"", {"kind"}},
    {"physics", {"particles", "temperature", "beta0", "beta1", "beta2", "g", "c", "g00", "g01", "g11"}},
    {"cutoffs", {"modes", "delta_q", "max_dimension"}},
    {"prep",
     {"mode", "samples", "seed", "theta", "pulse", "exhaustive_tail", "qmc_max_quanta",
      "eigen_max_quanta"}},
    {"time", {"start", "end", "points"}},
    {"grid", {"g", "c", "snapshot", "observable", "threshold"}},
    {"propagator", {"krylov_dim", "tol", "max_substep", "max_substeps"}},
    {"run", {"threads", "basis"}},
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty())
    throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty())
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

std::optional<double> to_pulse(const std::string& text) {
  const std::string t = trim(text);
  if (t == "none") return std::nullopt;
  if (t == "pi/2") return std::numbers::pi / 2;
  if (t == "pi") return std::numbers::pi;
  return to_double("prep.pulse", t);
}

ScenarioKind to_kind(const std::string& t) {
  for (auto k : {ScenarioKind::contrast_decay, ScenarioKind::sector_population,
                 ScenarioKind::squeezing_decay, ScenarioKind::gc_map, ScenarioKind::idealgas_fig1,
                 ScenarioKind::freeze_spatial_map})
    if (to_string(k) == t) return k;
  throw ConfigError("unknown kind '" + t + "'");
}

MapObservable to_observable(const std::string& t) {
  for (auto o : {MapObservable::max_sector, MapObservable::sx, MapObservable::coherence,
                 MapObservable::squeezing_ratio})
    if (to_string(o) == t) return o;
  throw ConfigError("unknown grid.observable '" + t + "'");
}

Scenario from_tree(const ptree& tree) {
  // reject unknown sections and keys so that typos do not silently fall back
  // to defaults
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      if (!allowed_keys.at("").contains(name)) throw ConfigError("unknown key '" + name + "'");
      continue;
    }
    auto section = allowed_keys.find(name);
    if (section == allowed_keys.end() || name.empty())
      throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : node)
      if (!section->second.contains(key))
        throw ConfigError("unknown key '" + name + "." + key + "'");
  }

  Scenario s;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(ptree::path_type(path, '.'))) return trim(*v);
    return std::nullopt;
  };
  auto number = [&](const std::string& path, double& target) {
    if (auto v = get(path)) target = to_double(path, *v);
  };
  auto integer = [&]<class I>(const std::string& path, I& target) {
    if (auto v = get(path)) {
      const long long x = to_integer(path, *v);
      if (x < 0 && std::is_unsigned_v<I>) throw ConfigError("'" + path + "' must be >= 0");
      target = static_cast<I>(x);
    }
  };

  if (auto v = get("kind")) s.kind = to_kind(*v);

  PhysicsParams& p = s.physics;
  integer("physics.particles", p.particles);
  number("physics.temperature", p.temperature);
  number("physics.beta0", p.beta0);
  number("physics.beta1", p.beta1);
  number("physics.beta2", p.beta2);
  double g = 0.5, c = 0.01;
  number("physics.g", g);
  number("physics.c", c);
  p.couplings = Couplings::from_gc(g, c);
  const bool explicit_couplings = get("physics.g00") || get("physics.g01") || get("physics.g11");
  if (explicit_couplings) {
    if (get("physics.g") || get("physics.c"))
      throw ConfigError("give either physics.g/c or physics.g00/g01/g11, not both");
    p.couplings = {};
    number("physics.g00", p.couplings.g00);
    number("physics.g01", p.couplings.g01);
    number("physics.g11", p.couplings.g11);
  }
  integer("cutoffs.modes", p.cutoffs.modes);
  integer("cutoffs.delta_q", p.cutoffs.delta_q);
  integer("cutoffs.max_dimension", p.cutoffs.max_dimension);

  if (auto v = get("prep.mode")) {
    try {
      s.prep.mode = parse_prep_mode(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  integer("prep.samples", s.prep.samples);
  integer("prep.seed", s.prep.seed);
  number("prep.theta", s.prep.theta_tact);
  if (auto v = get("prep.pulse")) s.prep.pulse = to_pulse(*v);
  number("prep.exhaustive_tail", s.prep.exhaustive_tail);
  integer("prep.qmc_max_quanta", s.prep.qmc_max_quanta);
  integer("prep.eigen_max_quanta", s.eigen_max_quanta);

  number("time.start", s.time.start);
  number("time.end", s.time.end);
  integer("time.points", s.time.points);

  if (auto v = get("grid.g")) s.grid.g = to_list("grid.g", *v);
  if (auto v = get("grid.c")) s.grid.c = to_list("grid.c", *v);
  number("grid.snapshot", s.grid.snapshot);
  if (auto v = get("grid.observable")) s.grid.observable = to_observable(*v);
  number("grid.threshold", s.grid.squeezing_threshold);

  integer("propagator.krylov_dim", s.propagator.krylov_dim);
  number("propagator.tol", s.propagator.tol);
  number("propagator.max_substep", s.propagator.max_substep);
  integer("propagator.max_substeps", s.propagator.max_substeps);

  integer("run.threads", s.threads);
  if (auto v = get("run.basis")) {
    if (*v == "sub_basis")
      s.basis = BasisPolicy::sub_basis;
    else if (*v == "frozen_spatial")
      s.basis = BasisPolicy::frozen_spatial;
    else
      throw ConfigError("unknown run.basis '" + *v + "'");
  }
  s.validate();
  return s;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + exact(v[i]);
  return out;
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  return from_tree(tree);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  if (path.extension() == ".json") {
    // a run manifest: re-run from its config echo
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("manifest: ") + e.what());
    }
    if (!m.contains("config")) throw ConfigError("manifest has no config section");
    ptree tree;
    for (const auto& [section, body] : m["config"].items()) {
      if (!body.is_object()) {
        tree.put(section, body.get<std::string>());
        continue;
      }
      for (const auto& [key, value] : body.items())
        tree.put(ptree::path_type(section + "." + key, '.'), value.get<std::string>());
    }
    return from_tree(tree);
  }
  return parse_scenario(in);
}

nlohmann::json to_json(const Scenario& s) {
  // every value as the string the config parser accepts
  const PhysicsParams& p = s.physics;
  nlohmann::json j;
  j["kind"] = std::string(to_string(s.kind));
  j["physics"] = {{"particles", std::to_string(p.particles)},
                  {"temperature", exact(p.temperature)},
                  {"beta0", exact(p.beta0)},
                  {"beta1", exact(p.beta1)},
                  {"beta2", exact(p.beta2)},
                  {"g00", exact(p.couplings.g00)},
                  {"g01", exact(p.couplings.g01)},
                  {"g11", exact(p.couplings.g11)}};
  j["cutoffs"] = {{"modes", std::to_string(p.cutoffs.modes)},
                  {"delta_q", std::to_string(p.cutoffs.delta_q)},
                  {"max_dimension", std::to_string(p.cutoffs.max_dimension)}};
  j["prep"] = {{"mode", std::string(to_string(s.prep.mode))},
               {"samples", std::to_string(s.prep.samples)},
               {"seed", std::to_string(s.prep.seed)},
               {"theta", exact(s.prep.theta_tact)},
               {"pulse", s.prep.pulse ? exact(*s.prep.pulse) : "none"},
               {"exhaustive_tail", exact(s.prep.exhaustive_tail)},
               {"qmc_max_quanta", std::to_string(s.prep.qmc_max_quanta)},
               {"eigen_max_quanta", std::to_string(s.eigen_max_quanta)}};
  j["time"] = {{"start", exact(s.time.start)},
               {"end", exact(s.time.end)},
               {"points", std::to_string(s.time.points)}};
  j["grid"] = {{"g", join(s.grid.g)},
               {"c", join(s.grid.c)},
               {"snapshot", exact(s.grid.snapshot)},
               {"observable", std::string(to_string(s.grid.observable))},
               {"threshold", exact(s.grid.squeezing_threshold)}};
  j["propagator"] = {{"krylov_dim", std::to_string(s.propagator.krylov_dim)},
                     {"tol", exact(s.propagator.tol)},
                     {"max_substep", exact(s.propagator.max_substep)},
                     {"max_substeps", std::to_string(s.propagator.max_substeps)}};
  j["run"] = {{"threads", std::to_string(s.threads)},
              {"basis", s.basis == BasisPolicy::frozen_spatial ? "frozen_spatial" : "sub_basis"}};
  return j;
}

}  // namespace rephase
