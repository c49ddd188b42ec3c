#pragma once

#include <lagflow/diagnostics.hpp>
#include <lagflow/initial_condition.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagflow {

/// Which prognostic variable the field integrator advances.
enum class Formulation { velocity, vorticity };

inline std::string_view to_string(Formulation f) { return f == Formulation::velocity ? "velocity" : "vorticity"; }

struct SimConfig {
  int n = 64;
  int m = 32;
  double dt = 1e-3;
  double t_end = 1.0;
  ModelParams params;
  Formulation form = Formulation::velocity;
  ICSpec ic;
  double s = kDefaultSobolevIndex;
  int diag_every = 10;      // steps between diagnostics samples
  int snapshot_every = 0;   // steps between snapshots; 0 = initial and final only
  std::vector<double> nu_list;
  std::vector<double> eps_list;
  std::uint64_t direction_seed = 1;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enforces every SimConfig constraint; throws ConfigError naming the key.
inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.n < 8 || c.n % 2 != 0) fail("grid.n: must be even and >= 8 (got " + std::to_string(c.n) + ")");
  if (c.m < 2) fail("grid.m: must be >= 2");
  if (!(c.dt > 0.0)) fail("time.dt: must be > 0");
  if (!(c.t_end >= 0.0)) fail("time.t_end: must be >= 0");
  if (c.params.model == Model::euler_alpha && !(c.params.alpha > 0.0)) fail("model.alpha: must be > 0 for euler_alpha");
  if (!(c.params.nu >= 0.0)) fail("model.nu: must be >= 0");
  if (c.params.model == Model::euler && c.params.nu != 0.0) fail("model.nu: must be 0 for model euler");
  if (!(c.s > 2.0)) fail("output.s: Sobolev index must be > 2");
  if (c.diag_every < 1) fail("output.diag_every: must be >= 1");
  if (c.snapshot_every < 0) fail("output.snapshot_every: must be >= 0");
  if (c.ic.kind == ICKind::random) {
    if (c.ic.cutoff < 1) fail("ic.cutoff: must be >= 1");
    if (3 * c.ic.cutoff >= c.n) fail("ic.cutoff: K must satisfy K < n/3 for dealiasing headroom");
  }
  if (c.ic.kind == ICKind::modes && c.ic.modes.empty()) fail("ic.modes: required for kind = modes");
  for (double nu : c.nu_list)
    if (!(nu > 0.0)) fail("sweep.nu_list: every viscosity must be > 0");
  for (double e : c.eps_list)
    if (!(e > 0.0)) fail("sensitivity.eps_list: every epsilon must be > 0");
}

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"grid", {"n", "m"}},
      {"time", {"dt", "t_end"}},
      {"model", {"model", "alpha", "nu", "form"}},
      {"ic", {"kind", "seed", "p", "cutoff", "modes"}},
      {"output", {"s", "diag_every", "snapshot_every"}},
      {"sweep", {"nu_list"}},
      {"sensitivity", {"eps_list", "direction_seed"}},
  };
  return schema;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T v{};
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected " + (std::is_integral_v<T> ? "an integer" : "a number") + ", got '" + t + "'");
  }
  return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<double>(key, item));
  }
  return out;
}

inline std::vector<FourierMode> parse_modes(const std::string& text) {
  std::vector<FourierMode> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (trim(item).empty()) continue;
    std::istringstream fields(item);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (parts.size() != 4) throw ConfigError("ic.modes: each mode needs 'k1 k2 amplitude phase', got '" + trim(item) + "'");
    out.push_back({parse_number<int>("ic.modes", parts[0]), parse_number<int>("ic.modes", parts[1]),
                   parse_number<double>("ic.modes", parts[2]), parse_number<double>("ic.modes", parts[3])});
  }
  return out;
}

}  // namespace detail

/// Parses flat key = value text with [grid], [time], [model], [ic],
/// [output], [sweep] and [sensitivity] sections. Unknown sections or keys
/// are rejected. Required: model.model and ic.kind.
inline SimConfig parse_config_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  const auto& schema = detail::config_schema();
  for (const auto& [section, body] : tree) {
    auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' must be inside a section");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError("unknown key " + section + "." + key);
    }
  }

  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return detail::trim(*v);
    return std::nullopt;
  };

  SimConfig c;
  if (auto v = get("grid.n")) c.n = detail::parse_number<int>("grid.n", *v);
  if (auto v = get("grid.m")) c.m = detail::parse_number<int>("grid.m", *v);
  if (auto v = get("time.dt")) c.dt = detail::parse_number<double>("time.dt", *v);
  if (auto v = get("time.t_end")) c.t_end = detail::parse_number<double>("time.t_end", *v);

  const auto model = get("model.model");
  if (!model) throw ConfigError("missing required key model.model");
  if (*model == "euler") {
    c.params.model = Model::euler;
  } else if (*model == "euler_alpha") {
    c.params.model = Model::euler_alpha;
  } else {
    throw ConfigError("model.model: expected euler or euler_alpha, got '" + *model + "'");
  }
  if (auto v = get("model.alpha")) {
    c.params.alpha = detail::parse_number<double>("model.alpha", *v);
  } else if (c.params.model == Model::euler_alpha) {
    throw ConfigError("missing required key model.alpha (model euler_alpha needs alpha > 0)");
  }
  if (auto v = get("model.nu")) c.params.nu = detail::parse_number<double>("model.nu", *v);
  if (auto v = get("model.form")) {
    if (*v == "velocity") {
      c.form = Formulation::velocity;
    } else if (*v == "vorticity") {
      c.form = Formulation::vorticity;
    } else {
      throw ConfigError("model.form: expected velocity or vorticity, got '" + *v + "'");
    }
  }

  const auto kind = get("ic.kind");
  if (!kind) throw ConfigError("missing required key ic.kind");
  if (*kind == "taylor_green") {
    c.ic.kind = ICKind::taylor_green;
  } else if (*kind == "shear") {
    c.ic.kind = ICKind::shear;
  } else if (*kind == "modes") {
    c.ic.kind = ICKind::modes;
  } else if (*kind == "random") {
    c.ic.kind = ICKind::random;
  } else {
    throw ConfigError("ic.kind: expected taylor_green, shear, modes or random, got '" + *kind + "'");
  }
  if (auto v = get("ic.seed")) c.ic.seed = detail::parse_number<std::uint64_t>("ic.seed", *v);
  if (auto v = get("ic.p")) c.ic.p = detail::parse_number<double>("ic.p", *v);
  if (auto v = get("ic.cutoff")) c.ic.cutoff = detail::parse_number<int>("ic.cutoff", *v);
  if (auto v = get("ic.modes")) c.ic.modes = detail::parse_modes(*v);

  if (auto v = get("output.s")) c.s = detail::parse_number<double>("output.s", *v);
  if (auto v = get("output.diag_every")) c.diag_every = detail::parse_number<int>("output.diag_every", *v);
  if (auto v = get("output.snapshot_every")) c.snapshot_every = detail::parse_number<int>("output.snapshot_every", *v);
  if (auto v = get("sweep.nu_list")) c.nu_list = detail::parse_list("sweep.nu_list", *v);
  if (auto v = get("sensitivity.eps_list")) c.eps_list = detail::parse_list("sensitivity.eps_list", *v);
  if (auto v = get("sensitivity.direction_seed")) {
    c.direction_seed = detail::parse_number<std::uint64_t>("sensitivity.direction_seed", *v);
  }

  validate(c);
  return c;
}

inline SimConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Writes every key, so parse(serialize(c)) == c.
inline std::string serialize_config(const SimConfig& c) {
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
  };
  std::ostringstream os;
  os << "[grid]\nn = " << c.n << "\nm = " << c.m << "\n\n";
  os << "[time]\ndt = " << format_double(c.dt) << "\nt_end = " << format_double(c.t_end) << "\n\n";
  os << "[model]\nmodel = " << to_string(c.params.model) << "\n";
  if (c.params.model == Model::euler_alpha || c.params.alpha != 0.0) os << "alpha = " << format_double(c.params.alpha) << "\n";
  os << "nu = " << format_double(c.params.nu) << "\nform = " << to_string(c.form) << "\n\n";
  os << "[ic]\nkind = " << to_string(c.ic.kind) << "\nseed = " << c.ic.seed << "\np = " << format_double(c.ic.p)
     << "\ncutoff = " << c.ic.cutoff << "\n";
  if (!c.ic.modes.empty()) {
    os << "modes = ";
    for (std::size_t i = 0; i < c.ic.modes.size(); ++i) {
      const auto& m = c.ic.modes[i];
      os << (i ? "; " : "") << m.k1 << ' ' << m.k2 << ' ' << format_double(m.amplitude) << ' ' << format_double(m.phase);
    }
    os << "\n";
  }
  os << "\n[output]\ns = " << format_double(c.s) << "\ndiag_every = " << c.diag_every
     << "\nsnapshot_every = " << c.snapshot_every << "\n";
  if (!c.nu_list.empty()) os << "\n[sweep]\nnu_list = " << list(c.nu_list) << "\n";
  os << "\n[sensitivity]\n";
  if (!c.eps_list.empty()) os << "eps_list = " << list(c.eps_list) << "\n";
  os << "direction_seed = " << c.direction_seed << "\n";
  return os.str();
}

}  // namespace lagflow
