#include "cemdc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cemdc {

ScalarFunction SourceSpec::make() const {
  switch (kind) {
    case Kind::zero:
      return [](double, double) { return 0.0; };
    case Kind::constant: {
      const double v = value;
      return [v](double, double) { return v; };
    }
    case Kind::sinsin:
      return [](double x, double y) {
        const double pi = 3.14159265358979323846;
        return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
      };
    case Kind::box: {
      const double v = value, bx0 = x0, by0 = y0, bx1 = x1, by1 = y1;
      return [v, bx0, by0, bx1, by1](double x, double y) {
        return (x >= bx0 && x <= bx1 && y >= by0 && y <= by1) ? v : 0.0;
      };
    }
  }
  return [](double, double) { return 0.0; };
}

std::string SourceSpec::describe() const {
  char buf[160];
  switch (kind) {
    case Kind::zero: return "zero";
    case Kind::constant:
      std::snprintf(buf, sizeof buf, "const %.10g", value);
      return buf;
    case Kind::sinsin: return "sinsin";
    case Kind::box:
      std::snprintf(buf, sizeof buf, "box %.10g %.10g %.10g %.10g %.10g", x0, y0, x1, y1, value);
      return buf;
  }
  return "zero";
}

namespace {

struct RawEntry {
  int line;
  std::string key;
  std::vector<std::string> tokens;
};

std::vector<RawEntry> tokenize(const std::string& text) {
  std::vector<RawEntry> entries;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t eq = line.find('=');
    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      const size_t b = s.find_first_not_of(ws);
      if (b == std::string::npos) return std::string();
      const size_t e = s.find_last_not_of(ws);
      return s.substr(b, e - b + 1);
    };
    if (eq == std::string::npos) {
      if (!trim(line).empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    RawEntry entry;
    entry.line = lineno;
    entry.key = trim(line.substr(0, eq));
    if (entry.key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    std::istringstream vs(line.substr(eq + 1));
    std::string tok;
    while (vs >> tok) entry.tokens.push_back(tok);
    entries.push_back(std::move(entry));
  }
  return entries;
}

double to_double(const RawEntry& e, const std::string& tok) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(e.line) + ", key '" + e.key +
                      "': '" + tok + "' is not a number");
  }
}

int to_int(const RawEntry& e, const std::string& tok) {
  const double v = to_double(e, tok);
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-12)
    throw ConfigError("config line " + std::to_string(e.line) + ", key '" + e.key +
                      "': '" + tok + "' is not an integer");
  return i;
}

bool to_bool(const RawEntry& e, const std::string& tok) {
  if (tok == "true" || tok == "on" || tok == "1") return true;
  if (tok == "false" || tok == "off" || tok == "0") return false;
  throw ConfigError("config line " + std::to_string(e.line) + ", key '" + e.key +
                    "': '" + tok + "' is not a boolean");
}

void need(const RawEntry& e, size_t n) {
  if (e.tokens.size() != n)
    throw ConfigError("config line " + std::to_string(e.line) + ", key '" + e.key + "': expected " +
                      std::to_string(n) + " value(s), got " + std::to_string(e.tokens.size()));
}

void need_at_least(const RawEntry& e, size_t n) {
  if (e.tokens.size() < n)
    throw ConfigError("config line " + std::to_string(e.line) + ", key '" + e.key +
                      "': expected at least " + std::to_string(n) + " value(s)");
}

SourceSpec parse_source(const RawEntry& e) {
  need_at_least(e, 1);
  SourceSpec s;
  const std::string& kind = e.tokens[0];
  if (kind == "zero") {
    need(e, 1);
    s.kind = SourceSpec::Kind::zero;
  } else if (kind == "sinsin") {
    need(e, 1);
    s.kind = SourceSpec::Kind::sinsin;
  } else if (kind == "const") {
    need(e, 2);
    s.kind = SourceSpec::Kind::constant;
    s.value = to_double(e, e.tokens[1]);
  } else if (kind == "box") {
    need(e, 6);
    s.kind = SourceSpec::Kind::box;
    s.x0 = to_double(e, e.tokens[1]);
    s.y0 = to_double(e, e.tokens[2]);
    s.x1 = to_double(e, e.tokens[3]);
    s.y1 = to_double(e, e.tokens[4]);
    s.value = to_double(e, e.tokens[5]);
  } else {
    throw ConfigError("config line " + std::to_string(e.line) + ", key '" + e.key +
                      "': unknown source kind '" + kind + "'");
  }
  return s;
}

}  // namespace

StudyConfig parse_config_text(const std::string& text, bool strict) {
  StudyConfig cfg;
  cfg.f1 = SourceSpec{SourceSpec::Kind::sinsin};
  cfg.f2 = SourceSpec{SourceSpec::Kind::constant, 1.0};

  bool saw_dt = false, saw_transient_enabled = false, transient_value = false, saw_preset = false;
  std::set<std::string> seen;
  const std::set<std::string> repeatable = {"media.channel"};

  for (const RawEntry& e : tokenize(text)) {
    if (!repeatable.count(e.key) && !seen.insert(e.key).second)
      throw ConfigError("config line " + std::to_string(e.line) + ": duplicate key '" + e.key + "'");

    if (e.key == "grid.n_coarse") {
      need_at_least(e, 1);
      cfg.n_coarse_list.clear();
      for (const auto& t : e.tokens) cfg.n_coarse_list.push_back(to_int(e, t));
    } else if (e.key == "grid.n_fine") {
      need(e, 1);
      cfg.n_fine = to_int(e, e.tokens[0]);
    } else if (e.key == "media.preset") {
      need(e, 1);
      saw_preset = true;
      cfg.media_preset = e.tokens[0];
    } else if (e.key == "media.file") {
      need(e, 1);
      cfg.media_file = e.tokens[0];
    } else if (e.key == "media.background_kappa") {
      need(e, 2);
      cfg.background_kappa = {to_double(e, e.tokens[0]), to_double(e, e.tokens[1])};
    } else if (e.key == "media.contrast") {
      need_at_least(e, 1);
      cfg.contrast_list.clear();
      for (const auto& t : e.tokens) cfg.contrast_list.push_back(to_double(e, t));
    } else if (e.key == "media.channel") {
      // <continuum> <kappa_mult> <cap_mult> <x0> <y0> <x1> <y1> [more rects]
      need_at_least(e, 7);
      if ((e.tokens.size() - 3) % 4 != 0)
        throw ConfigError("config line " + std::to_string(e.line) +
                          ": media.channel needs 3 values plus groups of 4 rectangle coordinates");
      Channel ch;
      ch.continuum = to_int(e, e.tokens[0]) - 1;  // config counts continua from 1
      ch.kappa_multiplier = to_double(e, e.tokens[1]);
      ch.capacity_multiplier = to_double(e, e.tokens[2]);
      for (size_t k = 3; k + 3 < e.tokens.size(); k += 4)
        ch.segments.push_back({to_double(e, e.tokens[k]), to_double(e, e.tokens[k + 1]),
                               to_double(e, e.tokens[k + 2]), to_double(e, e.tokens[k + 3])});
      cfg.channels.push_back(std::move(ch));
    } else if (e.key == "media.channel_kappa_multiplier") {
      need(e, 2);
      cfg.channel_kappa_multiplier = {to_double(e, e.tokens[0]), to_double(e, e.tokens[1])};
    } else if (e.key == "media.channel_capacity_multiplier") {
      need(e, 2);
      cfg.channel_capacity_multiplier = {to_double(e, e.tokens[0]), to_double(e, e.tokens[1])};
    } else if (e.key == "physics.rho") {
      need(e, 1);
      cfg.rho = to_double(e, e.tokens[0]);
    } else if (e.key == "physics.sigma") {
      need(e, 1);
      cfg.sigma = to_double(e, e.tokens[0]);
    } else if (e.key == "physics.capacity") {
      need(e, 2);
      cfg.background_capacity = {to_double(e, e.tokens[0]), to_double(e, e.tokens[1])};
    } else if (e.key == "aux.basis_per_element") {
      need_at_least(e, 1);
      cfg.basis_per_element_list.clear();
      for (const auto& t : e.tokens) cfg.basis_per_element_list.push_back(to_int(e, t));
    } else if (e.key == "aux.extra_eigenvalues") {
      need(e, 1);
      cfg.extra_eigenvalues = to_int(e, e.tokens[0]);
    } else if (e.key == "basis.layers") {
      need_at_least(e, 1);
      if (e.tokens.size() == 1 && e.tokens[0] == "formula") {
        cfg.layers_from_formula = true;
        cfg.layers_list.clear();
      } else {
        cfg.layers_from_formula = false;
        cfg.layers_list.clear();
        for (const auto& t : e.tokens) cfg.layers_list.push_back(to_int(e, t));
      }
    } else if (e.key == "basis.constraint_scope") {
      need(e, 1);
      if (e.tokens[0] == "patch")
        cfg.constraint_scope_patch = true;
      else if (e.tokens[0] == "element")
        cfg.constraint_scope_patch = false;
      else
        throw ConfigError("config line " + std::to_string(e.line) +
                          ": basis.constraint_scope must be 'patch' or 'element'");
    } else if (e.key == "solver.mode") {
      need(e, 1);
      if (e.tokens[0] == "direct")
        cfg.solver_direct = true;
      else if (e.tokens[0] == "cg")
        cfg.solver_direct = false;
      else
        throw ConfigError("config line " + std::to_string(e.line) +
                          ": solver.mode must be 'direct' or 'cg'");
    } else if (e.key == "solver.tolerance") {
      need(e, 1);
      cfg.solver_tolerance = to_double(e, e.tokens[0]);
    } else if (e.key == "solver.threads") {
      need(e, 1);
      cfg.threads = to_int(e, e.tokens[0]);
    } else if (e.key == "transient.enabled") {
      need(e, 1);
      saw_transient_enabled = true;
      transient_value = to_bool(e, e.tokens[0]);
      cfg.transient_enabled = transient_value;
    } else if (e.key == "transient.final_time") {
      need(e, 1);
      cfg.final_time = to_double(e, e.tokens[0]);
    } else if (e.key == "transient.dt") {
      need_at_least(e, 1);
      saw_dt = true;
      cfg.dt_list.clear();
      for (const auto& t : e.tokens) cfg.dt_list.push_back(to_double(e, t));
    } else if (e.key == "transient.initial") {
      cfg.initial1 = parse_source(e);
      cfg.initial2 = cfg.initial1;
    } else if (e.key == "transient.initial2") {
      cfg.initial2 = parse_source(e);
    } else if (e.key == "transient.output_times") {
      cfg.output_times.clear();
      for (const auto& t : e.tokens) cfg.output_times.push_back(to_double(e, t));
    } else if (e.key == "source.f1") {
      cfg.f1 = parse_source(e);
    } else if (e.key == "source.f2") {
      cfg.f2 = parse_source(e);
    } else if (e.key == "output.directory") {
      need(e, 1);
      cfg.output_directory = e.tokens[0];
    } else if (e.key == "output.vtk") {
      need(e, 1);
      cfg.write_vtk = to_bool(e, e.tokens[0]);
    } else {
      if (strict)
        throw ConfigError("config line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
      cfg.warnings.push_back("ignored unknown key '" + e.key + "'");
    }
  }

  // cross-field validation
  if (cfg.n_coarse_list.empty()) throw ConfigError("config: grid.n_coarse list is empty");
  for (int nc : cfg.n_coarse_list) {
    if (nc < 2) throw ConfigError("config: n_coarse must be >= 2");
    if (cfg.n_fine % nc != 0)
      throw ConfigError("config: grid.n_fine " + std::to_string(cfg.n_fine) +
                        " is not divisible by n_coarse " + std::to_string(nc));
  }
  for (double c : cfg.contrast_list)
    if (c < 1.0) throw ConfigError("config: contrast must be >= 1");
  for (int c = 0; c < 2; ++c)
    if (cfg.channel_kappa_multiplier[c] <= 0.0 || cfg.channel_capacity_multiplier[c] <= 0.0)
      throw ConfigError("config: channel multipliers must be positive");
  for (int L : cfg.basis_per_element_list)
    if (L < 1) throw ConfigError("config: basis_per_element must be >= 1");
  if (cfg.extra_eigenvalues < 1) throw ConfigError("config: aux.extra_eigenvalues must be >= 1");
  if (!cfg.layers_from_formula) {
    if (cfg.layers_list.empty()) throw ConfigError("config: basis.layers list is empty");
    for (int m : cfg.layers_list)
      if (m < 1) throw ConfigError("config: oversampling layers must be >= 1");
  }
  if (cfg.solver_tolerance <= 0.0 || cfg.solver_tolerance >= 1.0)
    throw ConfigError("config: solver.tolerance must lie in (0, 1)");
  if (cfg.threads < 1) throw ConfigError("config: solver.threads must be >= 1");
  if (cfg.media_preset != "experiment1" && cfg.media_preset != "none")
    throw ConfigError("config: media.preset must be 'experiment1' or 'none'");
  if (!cfg.media_file.empty()) {
    if (!cfg.channels.empty() || (saw_preset && cfg.media_preset == "experiment1"))
      throw ConfigError("config: media.file excludes media.preset/media.channel");
    cfg.media_preset = "none";
  }
  if (cfg.transient_enabled) {
    if (cfg.final_time <= 0.0) throw ConfigError("config: transient.final_time must be positive");
    if (cfg.dt_list.empty()) throw ConfigError("config: transient enabled without transient.dt");
    for (double dt : cfg.dt_list)
      if (dt <= 0.0 || dt > cfg.final_time)
        throw ConfigError("config: transient.dt must lie in (0, final_time]");
    if (cfg.dt_list.size() != 1 && cfg.dt_list.size() != cfg.n_coarse_list.size())
      throw ConfigError("config: transient.dt must have one entry or one per grid.n_coarse");
  } else if (saw_dt && saw_transient_enabled && !transient_value) {
    cfg.warnings.push_back("transient.dt given but transient is disabled; dt is ignored");
  } else if (saw_dt && !saw_transient_enabled) {
    cfg.warnings.push_back("transient.dt given but transient is disabled; dt is ignored");
  }
  return cfg;
}

StudyConfig validate_config(const std::string& path, bool strict) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << is.rdbuf();
  StudyConfig cfg = parse_config_text(buffer.str(), strict);
  if (!cfg.media_file.empty()) {
    std::ifstream mf(cfg.media_file);
    if (!mf) throw ConfigError("config: media file '" + cfg.media_file + "' does not exist");
  }
  return cfg;
}

ChannelSpec config_channel_spec(const StudyConfig& cfg) {
  ChannelSpec spec;
  if (cfg.media_preset == "experiment1") spec = experiment_channel_spec();
  spec.background_kappa = cfg.background_kappa;
  for (const auto& ch : cfg.channels) spec.channels.push_back(ch);
  for (auto& ch : spec.channels) {
    ch.kappa_multiplier *= cfg.channel_kappa_multiplier[ch.continuum];
    ch.capacity_multiplier *= cfg.channel_capacity_multiplier[ch.continuum];
  }
  return spec;
}

MediaField make_media(const StudyConfig& cfg, const GridHierarchy& hier, double contrast,
                      ChannelizedReport* report) {
  if (!cfg.media_file.empty()) {
    MediaField field = load_media(cfg.media_file);
    field.check_compatible(hier);
    return field;
  }
  const Physics physics{cfg.rho, cfg.sigma, cfg.background_capacity};
  return generate_channelized(hier, config_channel_spec(cfg), contrast, physics, report);
}

std::string StudyConfig::echo() const {
  std::ostringstream os;
  char buf[160];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  os << "grid.n_coarse =";
  for (int nc : n_coarse_list) os << ' ' << nc;
  os << "\ngrid.n_fine = " << n_fine << '\n';
  if (!media_file.empty()) {
    os << "media.file = " << media_file << '\n';
  } else {
    os << "media.preset = " << media_preset << '\n';
    os << "media.background_kappa = " << num(background_kappa[0]) << ' ' << num(background_kappa[1])
       << '\n';
    for (const auto& ch : channels) {
      os << "media.channel = " << (ch.continuum + 1) << ' ' << num(ch.kappa_multiplier) << ' '
         << num(ch.capacity_multiplier);
      for (const auto& s : ch.segments)
        os << ' ' << num(s.x0) << ' ' << num(s.y0) << ' ' << num(s.x1) << ' ' << num(s.y1);
      os << '\n';
    }
  }
  os << "media.contrast =";
  for (double c : contrast_list) os << ' ' << num(c);
  os << '\n';
  if (media_file.empty()) {
    os << "media.channel_kappa_multiplier = " << num(channel_kappa_multiplier[0]) << ' '
       << num(channel_kappa_multiplier[1]) << '\n';
    os << "media.channel_capacity_multiplier = " << num(channel_capacity_multiplier[0]) << ' '
       << num(channel_capacity_multiplier[1]) << '\n';
  }
  os << "physics.rho = " << num(rho) << '\n';
  os << "physics.sigma = " << num(sigma) << '\n';
  os << "physics.capacity = " << num(background_capacity[0]) << ' ' << num(background_capacity[1])
     << '\n';
  os << "aux.basis_per_element =";
  for (int L : basis_per_element_list) os << ' ' << L;
  os << '\n';
  os << "aux.extra_eigenvalues = " << extra_eigenvalues << '\n';
  if (layers_from_formula) {
    os << "basis.layers = formula\n";
  } else {
    os << "basis.layers =";
    for (int m : layers_list) os << ' ' << m;
    os << '\n';
  }
  os << "basis.constraint_scope = " << (constraint_scope_patch ? "patch" : "element") << '\n';
  os << "solver.mode = " << (solver_direct ? "direct" : "cg") << '\n';
  os << "solver.tolerance = " << num(solver_tolerance) << '\n';
  os << "solver.threads = " << threads << '\n';
  os << "transient.enabled = " << (transient_enabled ? "true" : "false") << '\n';
  if (transient_enabled) {
    os << "transient.final_time = " << num(final_time) << '\n';
    os << "transient.dt =";
    for (double dt : dt_list) os << ' ' << num(dt);
    os << '\n';
    os << "transient.initial = " << initial1.describe() << '\n';
    os << "transient.initial2 = " << initial2.describe() << '\n';
    if (!output_times.empty()) {
      os << "transient.output_times =";
      for (double t : output_times) os << ' ' << num(t);
      os << '\n';
    }
  }
  os << "source.f1 = " << f1.describe() << '\n';
  os << "source.f2 = " << f2.describe() << '\n';
  os << "output.directory = " << output_directory << '\n';
  os << "output.vtk = " << (write_vtk ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace cemdc
