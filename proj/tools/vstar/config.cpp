#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "vstar/errors.hpp"

namespace vstar::cli {

namespace {

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

double parse_double(const std::string& text, const std::string& key, std::size_t line) {
  const std::string s = boost::algorithm::trim_copy(text);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, s), line);
  }
  return v;
}

std::size_t parse_count(const std::string& text, const std::string& key, std::size_t line) {
  const std::string s = boost::algorithm::trim_copy(text);
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(fmt::format("{}: expected a nonnegative integer, got '{}'", key, s), line);
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key, std::size_t line) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (boost::algorithm::trim_copy(item).empty()) continue;
    out.push_back(parse_double(item, key, line));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&, std::size_t)>;
using Getter = std::function<std::optional<std::string>(const RunConfig&)>;

struct Field {
  std::string section;
  std::string key;
  Setter set;
  Getter get;
};

template <class Member>
Field number(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](RunConfig& c, const std::string& v, const std::string& name, std::size_t line) {
            member(c) = parse_double(v, name, line);
          },
          [member](const RunConfig& c) -> std::optional<std::string> {
            return fmt_double(member(c));
          }};
}

template <class Member>
Field count(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](RunConfig& c, const std::string& v, const std::string& name, std::size_t line) {
            member(c) = parse_count(v, name, line);
          },
          [member](const RunConfig& c) -> std::optional<std::string> {
            return std::to_string(member(c));
          }};
}

template <class Member>
Field optional_number(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](RunConfig& c, const std::string& v, const std::string& name, std::size_t line) {
            member(c) = parse_double(v, name, line);
          },
          [member](const RunConfig& c) -> std::optional<std::string> {
            const auto& o = member(c);
            if (!o) return std::nullopt;
            return fmt_double(*o);
          }};
}

template <class Member>
Field text(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](RunConfig& c, const std::string& v, const std::string&, std::size_t) {
            member(c) = boost::algorithm::trim_copy(v);
          },
          [member](const RunConfig& c) -> std::optional<std::string> {
            return member(c);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(text("eos", "kind", [](auto& c) -> auto& { return c.eos.kind; }));
    f.push_back(number("eos", "kappa", [](auto& c) -> auto& { return c.eos.kappa; }));
    f.push_back(number("eos", "gamma", [](auto& c) -> auto& { return c.eos.gamma; }));
    f.push_back(number("eos", "gamma1", [](auto& c) -> auto& { return c.eos.gamma1; }));
    f.push_back(number("eos", "gamma2", [](auto& c) -> auto& { return c.eos.gamma2; }));

    f.push_back(optional_number("equilibrium", "rho_c",
                                [](auto& c) -> auto& { return c.equilibrium.rho_c; }));
    f.push_back(optional_number("equilibrium", "target_mass",
                                [](auto& c) -> auto& { return c.equilibrium.target_mass; }));
    f.push_back(number("equilibrium", "G", [](auto& c) -> auto& { return c.equilibrium.G; }));
    f.push_back(number("equilibrium", "ode_tol",
                       [](auto& c) -> auto& { return c.equilibrium.ode_tol; }));
    f.push_back(count("equilibrium", "n_cells",
                      [](auto& c) -> auto& { return c.equilibrium.n_cells; }));
    f.push_back(number("equilibrium", "grading_q",
                       [](auto& c) -> auto& { return c.equilibrium.grading_q; }));
    f.push_back(number("equilibrium", "rho_c_low",
                       [](auto& c) -> auto& { return c.equilibrium.rho_c_low; }));
    f.push_back(number("equilibrium", "rho_c_high",
                       [](auto& c) -> auto& { return c.equilibrium.rho_c_high; }));
    f.push_back(number("equilibrium", "tol_mass",
                       [](auto& c) -> auto& { return c.equilibrium.tol_mass; }));

    f.push_back(text("perturbation", "kind",
                     [](auto& c) -> auto& { return c.perturbation.kind; }));
    f.push_back(number("perturbation", "epsilon",
                       [](auto& c) -> auto& { return c.perturbation.epsilon; }));
    f.push_back(number("perturbation", "shape_exponent",
                       [](auto& c) -> auto& { return c.perturbation.shape_exponent; }));

    f.push_back(count("sim", "n_cells", [](auto& c) -> auto& { return c.sim.n_cells; }));
    f.push_back(number("sim", "grading_q", [](auto& c) -> auto& { return c.sim.grading_q; }));
    f.push_back(number("sim", "dt_init", [](auto& c) -> auto& { return c.sim.dt_init; }));
    f.push_back(number("sim", "dt_max", [](auto& c) -> auto& { return c.sim.dt_max; }));
    f.push_back(number("sim", "cfl", [](auto& c) -> auto& { return c.sim.cfl; }));
    f.push_back(number("sim", "t_final", [](auto& c) -> auto& { return c.sim.t_final; }));
    f.push_back(number("sim", "newton_tol", [](auto& c) -> auto& { return c.sim.newton_tol; }));
    f.push_back(count("sim", "newton_max", [](auto& c) -> auto& { return c.sim.newton_max; }));
    f.push_back(number("sim", "snapshot_every",
                       [](auto& c) -> auto& { return c.sim.snapshot_every; }));
    f.push_back(number("sim", "sample_every",
                       [](auto& c) -> auto& { return c.sim.sample_every; }));
    f.push_back(number("sim", "nu1", [](auto& c) -> auto& { return c.sim.nu1; }));
    f.push_back(number("sim", "nu2", [](auto& c) -> auto& { return c.sim.nu2; }));
    f.push_back(count("sim", "max_rejections",
                      [](auto& c) -> auto& { return c.sim.max_rejections; }));
    f.push_back(number("sim", "frakE0_bound",
                       [](auto& c) -> auto& { return c.sim.frakE0_bound; }));

    f.push_back(number("diagnostics", "theta",
                       [](auto& c) -> auto& { return c.diagnostics.theta; }));
    f.push_back(number("diagnostics", "l_fraction",
                       [](auto& c) -> auto& { return c.diagnostics.l_fraction; }));
    f.push_back(number("diagnostics", "e0_bound",
                       [](auto& c) -> auto& { return c.diagnostics.e0_bound; }));
    f.push_back(number("diagnostics", "fit_t_lo",
                       [](auto& c) -> auto& { return c.diagnostics.fit_t_lo; }));
    f.push_back(number("diagnostics", "fit_t_hi",
                       [](auto& c) -> auto& { return c.diagnostics.fit_t_hi; }));
    f.push_back(number("diagnostics", "slack",
                       [](auto& c) -> auto& { return c.diagnostics.slack; }));

    f.push_back(optional_number("check", "s_max",
                                [](auto& c) -> auto& { return c.check.s_max; }));
    f.push_back(count("check", "n_samples", [](auto& c) -> auto& { return c.check.n_samples; }));
    f.push_back(number("check", "decades", [](auto& c) -> auto& { return c.check.decades; }));

    f.push_back(text("sweep", "axis", [](auto& c) -> auto& { return c.sweep.axis; }));
    f.push_back({"sweep", "values",
                 [](RunConfig& c, const std::string& v, const std::string& name, std::size_t line) {
                   c.sweep.values = parse_list(v, name, line);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   std::string s;
                   for (std::size_t k = 0; k < c.sweep.values.size(); ++k) {
                     if (k) s += ", ";
                     s += fmt_double(c.sweep.values[k]);
                   }
                   return s;
                 }});
    return f;
  }();
  return table;
}

// Line numbers of "[section]" headers and "key = value" entries, keyed "section" and
// "section.key". ptree drops this information.
std::map<std::string, std::size_t> line_index(const std::string& text) {
  std::map<std::string, std::size_t> index;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  std::size_t n = 0;
  while (std::getline(ss, line)) {
    ++n;
    const std::string t = boost::algorithm::trim_copy(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = boost::algorithm::trim_copy(t.substr(1, t.size() - 2));
      index.emplace(section, n);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = boost::algorithm::trim_copy(t.substr(0, eq));
    index.emplace(section + "." + key, n);
  }
  return index;
}

void rethrow_as_config(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const vstar::Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.message()), e.line());
  }
  const auto index = line_index(text);
  auto line_of = [&](const std::string& key) {
    const auto it = index.find(key);
    return it == index.end() ? std::size_t{0} : it->second;
  };

  // ptree drops empty sections, so headers are checked against the raw text.
  for (const auto& [name, line] : index) {
    if (name.find('.') != std::string::npos) continue;
    bool known = false;
    for (const auto& f : fields()) known = known || f.section == name;
    if (!known) throw ConfigError(fmt::format("{}: unknown section [{}]", origin, name), line);
  }

  RunConfig cfg;
  cfg.source = text;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside any section", origin, section),
                        line_of("." + section));
    }
    bool known_section = false;
    for (const auto& f : fields()) known_section = known_section || f.section == section;
    if (!known_section) {
      throw ConfigError(fmt::format("{}: unknown section [{}]", origin, section), line_of(section));
    }
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const Field* field = nullptr;
      for (const auto& f : fields()) {
        if (f.section == section && f.key == key) field = &f;
      }
      if (!field) throw ConfigError(fmt::format("{}: unknown key '{}'", origin, name), line_of(name));
      field->set(cfg, value.data(), name, line_of(name));
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

bool is_sweep_axis(const std::string& axis) {
  return axis == "rho_c" || axis == "theta" || axis == "epsilon" || axis == "nu1" ||
         axis == "nu2" || axis == "gamma";
}

void apply_axis(RunConfig& cfg, const std::string& axis, double value) {
  if (axis == "rho_c") {
    cfg.equilibrium.rho_c = value;
    cfg.equilibrium.target_mass.reset();
  } else if (axis == "theta") {
    cfg.diagnostics.theta = value;
  } else if (axis == "epsilon") {
    cfg.perturbation.epsilon = value;
  } else if (axis == "nu1") {
    cfg.sim.nu1 = value;
  } else if (axis == "nu2") {
    cfg.sim.nu2 = value;
  } else if (axis == "gamma") {
    if (cfg.eos.kind != "polytrope") throw ConfigError("sweep axis 'gamma' needs eos.kind = polytrope");
    cfg.eos.gamma = value;
  } else {
    throw ConfigError("unknown sweep axis '" + axis +
                      "' (expected rho_c, theta, epsilon, nu1, nu2 or gamma)");
  }
}

EosPtr build_eos(const RunConfig& cfg) {
  EosPtr eos;
  rethrow_as_config([&] {
    if (cfg.eos.kind == "polytrope") {
      eos = make_polytrope({cfg.eos.kappa, cfg.eos.gamma});
    } else if (cfg.eos.kind == "white_dwarf") {
      eos = make_white_dwarf({cfg.eos.gamma1, cfg.eos.gamma2});
    } else {
      throw ParameterError("eos.kind must be polytrope or white_dwarf, got '" + cfg.eos.kind + "'");
    }
  });
  return eos;
}

DiagnosticsConfig diagnostics_config(const RunConfig& cfg) {
  DiagnosticsConfig d;
  d.theta = cfg.diagnostics.theta;
  d.l_fraction = cfg.diagnostics.l_fraction;
  d.e0_bound = cfg.diagnostics.e0_bound;
  return d;
}

Perturbation perturbation(const RunConfig& cfg) {
  Perturbation p;
  rethrow_as_config([&] { p.kind = parse_perturbation_kind(cfg.perturbation.kind); });
  p.epsilon = cfg.perturbation.epsilon;
  p.shape_exponent = cfg.perturbation.shape_exponent;
  return p;
}

void validate(const RunConfig& cfg, Command command) {
  const EosPtr eos = build_eos(cfg);
  const auto& eq = cfg.equilibrium;
  if (eq.rho_c && eq.target_mass) {
    throw ConfigError("equilibrium: give rho_c or target_mass, not both");
  }
  if (eq.rho_c && !(*eq.rho_c > 0.0)) throw ConfigError("equilibrium.rho_c must be > 0");
  if (eq.target_mass && !(*eq.target_mass > 0.0)) {
    throw ConfigError("equilibrium.target_mass must be > 0");
  }
  if (!(eq.G > 0.0)) throw ConfigError("equilibrium.G must be > 0");
  if (!(eq.ode_tol > 0.0)) throw ConfigError("equilibrium.ode_tol must be > 0");
  if (eq.n_cells < 2) throw ConfigError("equilibrium.n_cells must be >= 2");
  if (!(eq.grading_q >= 1.0)) throw ConfigError("equilibrium.grading_q must be >= 1");
  if (!(eq.rho_c_low > 0.0 && eq.rho_c_high > eq.rho_c_low)) {
    throw ConfigError("equilibrium: need 0 < rho_c_low < rho_c_high");
  }
  if (!(eq.tol_mass > 0.0)) throw ConfigError("equilibrium.tol_mass must be > 0");

  if (command == Command::check_eos) {
    if (cfg.check.s_max && !(*cfg.check.s_max > 0.0)) throw ConfigError("check.s_max must be > 0");
    if (cfg.check.n_samples < 2) throw ConfigError("check.n_samples must be >= 2");
    if (!(cfg.check.decades > 0.0)) throw ConfigError("check.decades must be > 0");
  }
  if (command == Command::simulate || command == Command::sweep) {
    rethrow_as_config([&] { validate(cfg.sim); });
    const Perturbation p = perturbation(cfg);
    if (p.kind == PerturbationKind::velocity_bump && !(p.shape_exponent > 1.0)) {
      throw ConfigError("perturbation.shape_exponent must be > 1");
    }
    if (p.kind == PerturbationKind::map_dilation && !(1.0 + p.epsilon > 0.0)) {
      throw ConfigError("perturbation.epsilon must exceed -1 for map_dilation");
    }
    const auto& d = cfg.diagnostics;
    rethrow_as_config([&] { (void)theorem_rates(eos->gamma_bar(), d.theta); });
    if (!(d.l_fraction > 0.0 && d.l_fraction < 1.0)) {
      throw ConfigError("diagnostics.l_fraction must lie in (0, 1)");
    }
    if (!(d.e0_bound > 0.0)) throw ConfigError("diagnostics.e0_bound must be > 0");
    if (!(d.fit_t_lo >= 1.0)) throw ConfigError("diagnostics.fit_t_lo must be >= 1");
    if (!(d.fit_t_hi > d.fit_t_lo)) throw ConfigError("diagnostics.fit_t_hi must exceed fit_t_lo");
    if (!(d.slack >= 0.0)) throw ConfigError("diagnostics.slack must be >= 0");
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) {
    const auto v = f.get(cfg);
    if (!v) continue;
    j[f.section][f.key] = *v;
  }
  return j;
}

std::string to_ini(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto v = f.get(cfg);
    if (!v) continue;
    if (f.section == "sweep" && cfg.sweep.axis.empty() && cfg.sweep.values.empty()) continue;
    if (f.section != section) {
      out += (out.empty() ? "" : "\n") + fmt::format("[{}]\n", f.section);
      section = f.section;
    }
    out += fmt::format("{} = {}\n", f.key, *v);
  }
  return out;
}

}  // namespace vstar::cli
