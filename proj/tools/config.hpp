#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "latgram/latgram.h"

namespace cli {

// Exit codes shared by every subcommand.
enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kBadIndex = 3,
  kSingular = 4,
  kQuadrature = 5,
};

// Thrown anywhere in the CLI; carries the process exit code.
struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

using Node = std::vector<int>;
using Pair = std::pair<Node, Node>;

struct Sweep {
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  bool log = false;
  std::vector<double> values() const;
};

// Values given on the command line; each one overrides the config file.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> out;
  std::optional<int> d;
  std::optional<double> p, s, t;
  std::optional<std::string> drivers, targets, pairs, extents;
  std::optional<double> tol_abs, tol_rel;
  std::optional<unsigned> threads;
  // subcommand specific
  std::optional<std::string> t_sweep, p_sweep, method, y_f;
  std::optional<double> tau_max;
  std::optional<int> tau_count;
  std::optional<std::size_t> steps, stride;
  std::optional<std::string> gramian_source;
  bool self_compare = false;
};

struct RunConfig {
  std::string command;
  std::string out;
  lg_params params{2, 5.0, 1.0};
  double t = 5.0;
  std::vector<int> extents;
  std::vector<Node> drivers;
  std::vector<Node> targets;
  std::vector<Pair> pairs;
  lg_tolerances tol{1e-12, 1e-10};
  unsigned threads = 0;
  Sweep t_sweep{0.5, 10.0, 20, true};
  Sweep p_sweep{4.1, 10.0, 20, false};
  std::string method = "spectral";
  std::vector<double> y_f;
  std::vector<double> x0;
  double tau_max = 20.0;
  int tau_count = 401;
  std::size_t steps = 4000;
  std::size_t stride = 10;
  std::string gramian_source = "finite";
  bool self_compare = false;

  // The effective configuration, embedded in every output file. The thread
  // count is left out because it never changes results.
  nlohmann::json to_json() const;
};

// Reads the JSON config (if any), then applies the command-line overrides.
RunConfig resolve(const std::string& command, const Overrides& o);

std::vector<Node> parse_nodes(const std::string& text);
std::vector<Pair> parse_pairs(const std::string& text);
std::vector<int> parse_extents(const std::string& text);
Sweep parse_sweep(const std::string& text);

}  // namespace cli
