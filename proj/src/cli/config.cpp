#include "greedy_opt/experiment.hpp"
#include "greedy_opt/io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace greedy_opt {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw InvalidArgument("expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument("expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(to_u64(v)); }

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
  std::string text = v;
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  std::vector<double> out;
  std::string item;
  while (in >> item) out.push_back(to_double(item));
  return out;
}

std::string list_text(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

using Setter = std::function<void(Config&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem.kind", [](Config& c, const std::string& v) { c.problem.objective = parse_objective_kind(v); }},
      {"problem.dimension", [](Config& c, const std::string& v) { c.problem.dimension = to_size(v); }},
      {"problem.dictionary", [](Config& c, const std::string& v) { c.problem.dictionary = parse_dictionary_kind(v); }},
      {"problem.n_atoms", [](Config& c, const std::string& v) { c.problem.n_atoms = to_size(v); }},
      {"problem.norm", [](Config& c, const std::string& v) { c.problem.norm = NormSpec::parse(v); }},
      {"problem.planted", [](Config& c, const std::string& v) { c.problem.planted = parse_planted_kind(v); }},
      {"problem.sparsity", [](Config& c, const std::string& v) { c.problem.sparsity = to_size(v); }},
      {"problem.values", [](Config& c, const std::string& v) { c.problem.values = to_list(v); }},
      {"problem.magnitude_min", [](Config& c, const std::string& v) { c.problem.magnitude_min = to_double(v); }},
      {"problem.magnitude_max", [](Config& c, const std::string& v) { c.problem.magnitude_max = to_double(v); }},
      {"problem.tail_norm", [](Config& c, const std::string& v) { c.problem.tail_norm = to_double(v); }},
      {"problem.decay_exponent", [](Config& c, const std::string& v) { c.problem.decay_exponent = to_double(v); }},
      {"problem.rows", [](Config& c, const std::string& v) { c.problem.rows = to_size(v); }},
      {"problem.delta", [](Config& c, const std::string& v) { c.problem.delta = to_double(v); }},
      {"problem.data", [](Config& c, const std::string& v) { c.problem.data = parse_data_kind(v); }},
      {"problem.S", [](Config& c, const std::string& v) { c.problem.rsc_sparsity = to_size(v); }},
      {"problem.gamma", [](Config& c, const std::string& v) { c.problem.declared_gamma = to_double(v); }},
      {"problem.beta", [](Config& c, const std::string& v) { c.problem.declared_beta = to_double(v); }},
      {"problem.seed", [](Config& c, const std::string& v) { c.problem.seed = to_u64(v); }},

      {"solver.max_iterations", [](Config& c, const std::string& v) { c.solver.max_iterations = to_size(v); }},
      {"solver.t", [](Config& c, const std::string& v) { c.solver.weakness = WeaknessSequence::constant(to_double(v)); }},
      {"solver.t_list",
       [](Config& c, const std::string& v) { c.solver.weakness = WeaknessSequence::explicit_list(to_list(v)); }},
      {"solver.selection", [](Config& c, const std::string& v) { c.solver.selection = parse_selection_mode(v); }},
      {"solver.orth_tol", [](Config& c, const std::string& v) { c.solver.orth_tol = to_double(v); }},
      {"solver.line_tol", [](Config& c, const std::string& v) { c.solver.line_tol = to_double(v); }},
      {"solver.span_max_inner", [](Config& c, const std::string& v) { c.solver.span_max_inner = to_size(v); }},
      {"solver.stop_gap", [](Config& c, const std::string& v) { c.solver.stop_gap = to_double(v); }},

      {"variant", [](Config& c, const std::string& v) { c.variant = parse_variant(v); }},

      {"analysis.smoothness", [](Config& c, const std::string& v) { c.analyses.smoothness = to_bool(v); }},
      {"analysis.rsc", [](Config& c, const std::string& v) { c.analyses.rsc = to_bool(v); }},
      {"analysis.incoherence", [](Config& c, const std::string& v) { c.analyses.incoherence = to_bool(v); }},
      {"analysis.bounds", [](Config& c, const std::string& v) { c.analyses.bounds = to_bool(v); }},
      {"analysis.certificates", [](Config& c, const std::string& v) { c.analyses.certificates = to_bool(v); }},
      {"analysis.recursion", [](Config& c, const std::string& v) { c.analyses.recursion = to_bool(v); }},
      {"analysis.thm11_rate", [](Config& c, const std::string& v) { c.analyses.thm11_rate = to_bool(v); }},
      {"analysis.samples", [](Config& c, const std::string& v) { c.analysis.samples = to_size(v); }},
      {"analysis.u_grid", [](Config& c, const std::string& v) { c.analysis.u_grid = to_list(v); }},
      {"analysis.r", [](Config& c, const std::string& v) { c.analysis.r = to_double(v); }},
      {"analysis.V", [](Config& c, const std::string& v) { c.analysis.V = to_double(v); }},
      {"analysis.K", [](Config& c, const std::string& v) { c.analysis.K = to_size(v); }},
      {"analysis.S", [](Config& c, const std::string& v) { c.analysis.S = to_size(v); }},
      {"analysis.incoherence_mode",
       [](Config& c, const std::string& v) { c.analysis.incoherence_mode = parse_incoherence_mode(v); }},
      {"analysis.incoherence_budget", [](Config& c, const std::string& v) { c.analysis.incoherence_budget = to_u64(v); }},
      {"analysis.rate_m_min", [](Config& c, const std::string& v) { c.analysis.rate_m_min = to_size(v); }},
      {"analysis.rate_m_max", [](Config& c, const std::string& v) { c.analysis.rate_m_max = to_size(v); }},
      {"analysis.seed", [](Config& c, const std::string& v) { c.analysis.seed = to_u64(v); }},

      {"output.dir", [](Config& c, const std::string& v) { c.output.dir = v; }},
      {"output.prefix", [](Config& c, const std::string& v) { c.output.prefix = v; }},
      {"output.timing", [](Config& c, const std::string& v) { c.output.timing = to_bool(v); }},
  };
  return table;
}

}  // namespace

void Config::validate() const {
  problem.validate();
  solver.validate();
  if (analyses.recursion && problem.planted == PlantedKind::none) {
    throw ConfigError("analysis.recursion needs a planted problem (problem.planted != none)");
  }
  if (analyses.thm11_rate && analysis.rate_m_min >= analysis.rate_m_max) {
    throw ConfigError("analysis.rate_m_min must be below analysis.rate_m_max");
  }
  if (analysis.u_grid.size() < 2) throw ConfigError("analysis.u_grid needs at least two values");
  if (analysis.V && !(*analysis.V > 0.0)) throw ConfigError("analysis.V must be positive");
  if (output.prefix.empty()) throw ConfigError("output.prefix must not be empty");
}

Config parse_config(const std::string& text, const std::string& source) {
  Config config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    if ((key == "solver.t" && seen.count("solver.t_list")) || (key == "solver.t_list" && seen.count("solver.t"))) {
      throw ConfigError(where + "solver.t and solver.t_list are mutually exclusive");
    }
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    try {
      it->second(config, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string to_config_text(const Config& c) {
  std::ostringstream out;
  const auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << '\n'; };
  const auto num = [](double v) { return format_double(v); };
  const auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  const ProblemSpec& p = c.problem;
  kv("problem.kind", to_string(p.objective));
  kv("problem.dimension", std::to_string(p.dimension));
  kv("problem.dictionary", to_string(p.dictionary));
  kv("problem.n_atoms", std::to_string(p.n_atoms));
  kv("problem.norm", p.norm.to_string());
  kv("problem.planted", to_string(p.planted));
  kv("problem.sparsity", std::to_string(p.sparsity));
  if (!p.values.empty()) kv("problem.values", list_text(p.values));
  kv("problem.magnitude_min", num(p.magnitude_min));
  kv("problem.magnitude_max", num(p.magnitude_max));
  kv("problem.tail_norm", num(p.tail_norm));
  kv("problem.decay_exponent", num(p.decay_exponent));
  kv("problem.rows", std::to_string(p.rows));
  kv("problem.delta", num(p.delta));
  kv("problem.data", to_string(p.data));
  kv("problem.S", std::to_string(p.rsc_sparsity));
  if (p.declared_gamma) kv("problem.gamma", num(*p.declared_gamma));
  if (p.declared_beta) kv("problem.beta", num(*p.declared_beta));
  kv("problem.seed", std::to_string(p.seed));

  const SolverConfig& s = c.solver;
  kv("solver.max_iterations", std::to_string(s.max_iterations));
  if (s.weakness.is_constant()) {
    kv("solver.t", num(s.weakness.values().front()));
  } else {
    kv("solver.t_list", list_text(s.weakness.values()));
  }
  kv("solver.selection", to_string(s.selection));
  kv("solver.orth_tol", num(s.orth_tol));
  kv("solver.line_tol", num(s.line_tol));
  kv("solver.span_max_inner", std::to_string(s.span_max_inner));
  if (s.stop_gap) kv("solver.stop_gap", num(*s.stop_gap));

  kv("variant", to_string(c.variant));

  kv("analysis.smoothness", flag(c.analyses.smoothness));
  kv("analysis.rsc", flag(c.analyses.rsc));
  kv("analysis.incoherence", flag(c.analyses.incoherence));
  kv("analysis.bounds", flag(c.analyses.bounds));
  kv("analysis.certificates", flag(c.analyses.certificates));
  kv("analysis.recursion", flag(c.analyses.recursion));
  kv("analysis.thm11_rate", flag(c.analyses.thm11_rate));
  const AnalysisSettings& a = c.analysis;
  kv("analysis.samples", std::to_string(a.samples));
  kv("analysis.u_grid", list_text(a.u_grid));
  kv("analysis.r", num(a.r));
  if (a.V) kv("analysis.V", num(*a.V));
  kv("analysis.K", std::to_string(a.K));
  kv("analysis.S", std::to_string(a.S));
  kv("analysis.incoherence_mode", to_string(a.incoherence_mode));
  kv("analysis.incoherence_budget", std::to_string(a.incoherence_budget));
  kv("analysis.rate_m_min", std::to_string(a.rate_m_min));
  kv("analysis.rate_m_max", std::to_string(a.rate_m_max));
  if (a.seed) kv("analysis.seed", std::to_string(*a.seed));

  kv("output.dir", c.output.dir.generic_string());
  kv("output.prefix", c.output.prefix);
  kv("output.timing", flag(c.output.timing));
  return out.str();
}

}  // namespace greedy_opt
