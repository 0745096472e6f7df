#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cli {

using nlohmann::json;

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Failure(kUsage, msg); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) usage("not an integer: '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) usage("not a number: '" + s + "'");
  return v;
}

Node parse_node(const std::string& text) {
  if (text.empty()) usage("empty node index");
  Node n;
  for (const auto& c : split(text, ',')) n.push_back(to_int(c));
  return n;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    usage(std::string("config field '") + key + "': " + e.what());
  }
}

std::vector<Node> nodes_from(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string()) return parse_nodes(v.get<std::string>());
  return get<std::vector<Node>>(j, key);
}

std::vector<Pair> pairs_from(const json& j) {
  const auto& v = j.at("pairs");
  if (v.is_string()) return parse_pairs(v.get<std::string>());
  std::vector<Pair> out;
  for (const auto& p : get<std::vector<std::vector<Node>>>(j, "pairs")) {
    if (p.size() != 2) usage("config field 'pairs': every pair needs two nodes");
    out.emplace_back(p[0], p[1]);
  }
  return out;
}

Sweep sweep_from(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string()) return parse_sweep(v.get<std::string>());
  Sweep s;
  s.min = get<double>(v, "min");
  s.max = get<double>(v, "max");
  s.count = v.contains("count") ? get<int>(v, "count") : 1;
  const std::string spacing = v.contains("spacing") ? get<std::string>(v, "spacing") : "linear";
  if (spacing != "linear" && spacing != "log") usage("sweep spacing must be linear or log");
  s.log = spacing == "log";
  return s;
}

void validate_sweep(const Sweep& s, const char* name) {
  if (s.count < 1) usage(std::string(name) + ": count must be at least 1");
  if (!(s.min <= s.max)) usage(std::string(name) + ": min must not exceed max");
  if (s.log && !(s.min > 0)) usage(std::string(name) + ": log spacing needs min > 0");
}

json sweep_json(const Sweep& s) {
  return {{"min", s.min}, {"max", s.max}, {"count", s.count},
          {"spacing", s.log ? "log" : "linear"}};
}

Node unit(int d, std::initializer_list<int> ones) {
  Node n(static_cast<std::size_t>(d), 0);
  for (int k : ones)
    if (k < d) n[static_cast<std::size_t>(k)] = 1;
  return n;
}

}  // namespace

std::vector<double> Sweep::values() const {
  std::vector<double> v;
  if (count == 1) return {min};
  for (int k = 0; k < count; ++k) {
    const double f = static_cast<double>(k) / (count - 1);
    v.push_back(log ? min * std::pow(max / min, f) : min + (max - min) * f);
  }
  v.back() = max;
  return v;
}

std::vector<Node> parse_nodes(const std::string& text) {
  std::vector<Node> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ';')) out.push_back(parse_node(part));
  return out;
}

std::vector<Pair> parse_pairs(const std::string& text) {
  std::vector<Pair> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ';')) {
    const auto ij = split(part, ':');
    if (ij.size() != 2) usage("pairs are written i1,i2:j1,j2 and separated by ';'");
    out.emplace_back(parse_node(ij[0]), parse_node(ij[1]));
  }
  return out;
}

std::vector<int> parse_extents(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split(text, 'x')) out.push_back(to_int(part));
  return out;
}

Sweep parse_sweep(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() < 3 || parts.size() > 4) usage("sweeps are written min:max:count[:linear|log]");
  Sweep s;
  s.min = to_double(parts[0]);
  s.max = to_double(parts[1]);
  s.count = to_int(parts[2]);
  if (parts.size() == 4) {
    if (parts[3] != "linear" && parts[3] != "log") usage("sweep spacing must be linear or log");
    s.log = parts[3] == "log";
  }
  return s;
}

RunConfig resolve(const std::string& command, const Overrides& o) {
  json j = json::object();
  if (o.config_path) {
    std::ifstream in(*o.config_path);
    if (!in) throw Failure(kIo, "cannot read config file " + *o.config_path);
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Failure(kIo, "config file " + *o.config_path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) usage("config file must hold a JSON object");
  }

  RunConfig c;
  c.command = command;
  if (j.contains("d")) c.params.d = get<int>(j, "d");
  if (j.contains("p")) c.params.p = get<double>(j, "p");
  if (j.contains("s")) c.params.s = get<double>(j, "s");
  if (j.contains("t")) c.t = get<double>(j, "t");
  if (j.contains("out")) c.out = get<std::string>(j, "out");
  if (j.contains("tol_abs")) c.tol.abs_tol = get<double>(j, "tol_abs");
  if (j.contains("tol_rel")) c.tol.rel_tol = get<double>(j, "tol_rel");
  if (j.contains("threads")) c.threads = get<unsigned>(j, "threads");
  if (j.contains("method")) c.method = get<std::string>(j, "method");
  if (j.contains("gramian")) c.gramian_source = get<std::string>(j, "gramian");
  if (j.contains("tau_max")) c.tau_max = get<double>(j, "tau_max");
  if (j.contains("tau_count")) c.tau_count = get<int>(j, "tau_count");
  if (j.contains("steps")) c.steps = get<std::size_t>(j, "steps");
  if (j.contains("stride")) c.stride = get<std::size_t>(j, "stride");
  if (j.contains("self")) c.self_compare = get<bool>(j, "self");
  if (j.contains("y_f")) c.y_f = get<std::vector<double>>(j, "y_f");
  if (j.contains("x0")) c.x0 = get<std::vector<double>>(j, "x0");
  if (j.contains("t_sweep")) c.t_sweep = sweep_from(j, "t_sweep");
  if (j.contains("p_sweep")) c.p_sweep = sweep_from(j, "p_sweep");
  std::optional<std::vector<Node>> drivers, targets;
  std::optional<std::vector<Pair>> pairs;
  std::optional<std::vector<int>> extents;
  if (j.contains("drivers")) drivers = nodes_from(j, "drivers");
  if (j.contains("targets")) targets = nodes_from(j, "targets");
  if (j.contains("pairs")) pairs = pairs_from(j);
  if (j.contains("extents")) {
    extents = j.at("extents").is_string() ? parse_extents(get<std::string>(j, "extents"))
                                          : get<std::vector<int>>(j, "extents");
  }

  if (o.out) c.out = *o.out;
  if (o.d) c.params.d = *o.d;
  if (o.p) c.params.p = *o.p;
  if (o.s) c.params.s = *o.s;
  if (o.t) c.t = *o.t;
  if (o.tol_abs) c.tol.abs_tol = *o.tol_abs;
  if (o.tol_rel) c.tol.rel_tol = *o.tol_rel;
  if (o.method) c.method = *o.method;
  if (o.gramian_source) c.gramian_source = *o.gramian_source;
  if (o.tau_max) c.tau_max = *o.tau_max;
  if (o.tau_count) c.tau_count = *o.tau_count;
  if (o.steps) c.steps = *o.steps;
  if (o.stride) c.stride = *o.stride;
  if (o.self_compare) c.self_compare = true;
  if (o.t_sweep) c.t_sweep = parse_sweep(*o.t_sweep);
  if (o.p_sweep) c.p_sweep = parse_sweep(*o.p_sweep);
  if (o.y_f) {
    c.y_f.clear();
    for (const auto& v : split(*o.y_f, ',')) c.y_f.push_back(to_double(v));
  }
  if (o.drivers) drivers = parse_nodes(*o.drivers);
  if (o.targets) targets = parse_nodes(*o.targets);
  if (o.pairs) pairs = parse_pairs(*o.pairs);
  if (o.extents) extents = parse_extents(*o.extents);

  if (o.threads) {
    c.threads = *o.threads;
  } else if (!j.contains("threads")) {
    if (const char* env = std::getenv("LATTICE_GRAMIAN_THREADS"); env && *env) {
      c.threads = static_cast<unsigned>(to_int(env));
    }
  }

  const int d = c.params.d;
  if (d < 1) usage("lattice dimension must be at least 1");
  if (!(c.params.p > 0) || !(c.params.s > 0)) usage("p and s must be positive");
  if (!(c.t >= 0) || !std::isfinite(c.t)) usage("t must be finite and non-negative");
  if (!(c.tol.abs_tol > 0) || !(c.tol.rel_tol > 0)) usage("tolerances must be positive");
  if (c.method != "spectral" && c.method != "ode") usage("method must be spectral or ode");
  if (c.gramian_source != "finite" && c.gramian_source != "infinite")
    usage("gramian must be finite or infinite");
  if (c.tau_count < 2) usage("tau count must be at least 2");
  if (!(c.tau_max > 0)) usage("tau max must be positive");
  if (c.steps < 1) usage("steps must be at least 1");
  if (c.stride < 1) usage("stride must be at least 1");
  validate_sweep(c.t_sweep, "t sweep");
  validate_sweep(c.p_sweep, "p sweep");

  c.extents = extents.value_or(std::vector<int>(static_cast<std::size_t>(d), 21));
  c.drivers = drivers.value_or(std::vector<Node>{Node(static_cast<std::size_t>(d), 0)});
  if (targets) {
    c.targets = *targets;
  } else if (command == "trace-integrand") {
    c.targets = {unit(d, {}), unit(d, {0}), unit(d, {0, 1})};
    Node two = unit(d, {});
    two[0] = 2;
    c.targets.push_back(two);
  } else {
    c.targets = {unit(d, {}), unit(d, {0})};
    if (d >= 2) c.targets.push_back(unit(d, {0, 1}));
  }
  if (pairs) c.pairs = *pairs;

  auto check_dim = [d](const Node& n) {
    if (n.size() != static_cast<std::size_t>(d))
      throw Failure(kBadIndex, "node index has " + std::to_string(n.size()) +
                                   " coordinates, expected " + std::to_string(d));
  };
  for (const auto& n : c.drivers) check_dim(n);
  for (const auto& n : c.targets) check_dim(n);
  for (const auto& [a, b] : c.pairs) {
    check_dim(a);
    check_dim(b);
  }
  if (c.extents.size() != static_cast<std::size_t>(d))
    throw Failure(kBadIndex, "extents must list one size per axis");
  if (c.y_f.empty()) c.y_f.assign(c.targets.size(), 1.0);
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["command"] = command;
  j["d"] = params.d;
  j["p"] = params.p;
  j["s"] = params.s;
  j["t"] = t;
  j["tol_abs"] = tol.abs_tol;
  j["tol_rel"] = tol.rel_tol;
  j["drivers"] = drivers;
  if (command == "gramian" || command == "compare") {
    if (pairs.empty()) {
      j["pairs"] = command == "compare" ? "every node against the origin" : "all target pairs";
    } else {
      json p = json::array();
      for (const auto& [a, b] : pairs) p.push_back({a, b});
      j["pairs"] = p;
    }
  }
  if (command != "gramian" && command != "trace-integrand") j["extents"] = extents;
  if (command != "compare") j["targets"] = targets;
  if (command == "gramian-finite") j["method"] = method;
  if (command == "compare") j["self"] = self_compare;
  if (command == "energy-sweep") {
    j["t_sweep"] = sweep_json(t_sweep);
    j["p_sweep"] = sweep_json(p_sweep);
  }
  if (command == "synthesize") {
    j["y_f"] = y_f;
    if (!x0.empty()) j["x0"] = x0;
    j["steps"] = steps;
    j["stride"] = stride;
    j["gramian"] = gramian_source;
  }
  if (command == "trace-integrand") {
    j["tau_max"] = tau_max;
    j["tau_count"] = tau_count;
  }
  return j;
}

}  // namespace cli
