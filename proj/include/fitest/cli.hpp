#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fitest/engine.hpp"
#include "fitest/grid.hpp"

namespace fitest::cli {

// Stable across releases: 0 success, 2 configuration error, 3 data error,
// 4 numeric failure.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericError = 4,
};

using Json = nlohmann::ordered_json;

// Options shared by the three test commands.
struct TestOptions {
  double alpha = 0.05;
  int p = 1;
  std::string form = "sum";  // "sum" | "max"
  double ccs = 0.5;
  int boot = 200;
  std::uint64_t seed = 0;
  double eta = 1e-3;
  int workers = 0;  // 0 = auto
  double mass_floor = 5.0;
  std::size_t nx = 101;
};

struct MeanConfig {
  std::string data;
  double theta = 0.0;
  std::optional<double> h;       // default: 2 sd(x) n^{-1/5}
  std::optional<double> x_lo;    // default: data range
  std::optional<double> x_hi;
  TestOptions opt;
};

struct AuctionConfig {
  std::string data;
  int poly_order = 1;
  std::optional<double> h;
  std::optional<double> b_lower;  // default: overall sample minimum
  bool normalize_x = false;
  std::size_t ntau = 20;
  double tau_lo = 0.1;
  double tau_hi = 0.9;
  double x_trim = 0.1;  // covariate quantile trim for the test region
  TestOptions opt;
};

struct DidConfig {
  std::string data;
  long period_t = 0;
  long period_s = 0;
  int poly_order = 1;
  std::optional<double> h_t;
  std::optional<double> h_s;
  std::optional<double> x_lo;
  std::optional<double> x_hi;
  std::size_t ntau = 17;
  double tau_lo = 0.1;
  double tau_hi = 0.9;
  TestOptions opt;
};

struct SimulateConfig {
  std::vector<int> dgps = {1};
  std::vector<std::size_t> ns = {100};
  std::size_t reps = 1000;
  std::vector<double> ccs = {0.4, 0.5, 0.6};
  std::string theta_mode = "cp";  // "cp" | "fcp" | "both"
  int boot = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t nx = 101;
  int workers = 0;
  bool long_protocol = false;  // expands to the full table layout
};

// Strict (unknown keys rejected) JSON round trip. Echoed configs always list
// every field, defaults included, so re-ingesting an echo is the identity.
Json to_json(const MeanConfig&);
Json to_json(const AuctionConfig&);
Json to_json(const DidConfig&);
Json to_json(const SimulateConfig&);
MeanConfig mean_config_from_json(const Json&);
AuctionConfig auction_config_from_json(const Json&);
DidConfig did_config_from_json(const Json&);
SimulateConfig simulate_config_from_json(const Json&);

struct CommandOutput {
  Json report;               // full report document
  std::string grid_csv;      // per-grid diagnostics (empty unless a test command)
};

CommandOutput run_mean_command(const MeanConfig&);
CommandOutput run_auction_command(const AuctionConfig&);
CommandOutput run_did_command(const DidConfig&);
CommandOutput run_simulate_command(const SimulateConfig&);

// Per-replication rejection flags as CSV (simulate command).
std::string simulate_replications_csv(const Json& report);

}  // namespace fitest::cli
