// Batch front door: CSV in, JSON report out. See README for the column
// layouts and the exit-code taxonomy.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fitest/cli.hpp"
#include "fitest/common.hpp"

namespace {

using fitest::cli::CommandOutput;
using fitest::cli::Json;

struct IoOptions {
  std::string out = "-";
  std::string grid_out;
  std::string config_path;
};

void add_io_options(CLI::App* cmd, IoOptions& io, bool with_grid) {
  cmd->add_option("--out", io.out, "Report JSON path ('-' = stdout)");
  if (with_grid)
    cmd->add_option("--grid-out", io.grid_out, "Grid-level diagnostics CSV path");
  cmd->add_option("--config", io.config_path,
                  "Load a previously echoed config JSON instead of flags");
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << std::endl;
    return;
  }
  std::ofstream out(path);
  if (!out) throw fitest::DataError("cannot write to '" + path + "'");
  out << text << std::endl;
}

void emit(const CommandOutput& result, const IoOptions& io) {
  write_text(io.out, result.report.dump(2));
  if (!io.grid_out.empty() && !result.grid_csv.empty()) {
    std::ofstream out(io.grid_out);
    if (!out) throw fitest::DataError("cannot write to '" + io.grid_out + "'");
    out << result.grid_csv;
  }
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fitest::ConfigError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw fitest::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

template <typename Config>
void add_common_test_flags(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--alpha", cfg.opt.alpha, "Nominal level");
  cmd->add_option("--p", cfg.opt.p, "L_p exponent (integer >= 1)");
  cmd->add_option("--form", cfg.opt.form, "Aggregator: sum or max");
  cmd->add_option("--ccs", cfg.opt.ccs, "Contact-set tuning constant C_cs");
  cmd->add_option("--boot", cfg.opt.boot, "Bootstrap replications");
  cmd->add_option("--seed", cfg.opt.seed, "Random seed");
  cmd->add_option("--eta", cfg.opt.eta, "Degeneracy floor eta");
  cmd->add_option("--workers", cfg.opt.workers, "Worker threads (0 = auto); never changes results");
  cmd->add_option("--mass-floor", cfg.opt.mass_floor,
                  "Minimum effective local observations per grid point");
  cmd->add_option("--nx", cfg.opt.nx, "Covariate grid resolution");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-sided L_p tests of functional inequalities with contact-set bootstrap "
               "critical values"};
  app.require_subcommand(1);

  fitest::cli::MeanConfig mean_cfg;
  fitest::cli::AuctionConfig auction_cfg;
  fitest::cli::DidConfig did_cfg;
  fitest::cli::SimulateConfig sim_cfg;
  IoOptions mean_io, auction_io, did_io, sim_io;
  std::string sim_csv_out;

  auto* mean = app.add_subcommand("test-mean", "H0: E[Y - theta | X = x] <= 0 on a region");
  mean->add_option("--data", mean_cfg.data, "CSV with columns y, x1..xd");
  mean->add_option("--theta", mean_cfg.theta, "Null shift theta");
  mean->add_option("--h", mean_cfg.h, "Bandwidth (default 2 sd(x) n^{-1/5})");
  mean->add_option("--x-lo", mean_cfg.x_lo, "Test region lower edge (default data range)");
  mean->add_option("--x-hi", mean_cfg.x_hi, "Test region upper edge");
  add_common_test_flags(mean, mean_cfg);
  add_io_options(mean, mean_io, true);

  auto* auction = app.add_subcommand(
      "test-auction", "Bid-quantile inequalities for 2- vs 3-bidder auctions");
  auction->add_option("--data", auction_cfg.data,
                      "CSV with columns bid, x1..xd, auction_id, n_bidders");
  auction->add_option("--poly-order", auction_cfg.poly_order, "Local polynomial order r");
  auction->add_option("--h", auction_cfg.h, "Bandwidth (default 2 sd(x) n^{-1/5})");
  auction->add_option("--b-lower", auction_cfg.b_lower,
                      "Lower support endpoint (default: sample minimum bid)");
  auction->add_flag("--normalize-x", auction_cfg.normalize_x,
                    "Map the covariate through the Gaussian rank transform first");
  auction->add_option("--ntau", auction_cfg.ntau, "Quantile grid resolution");
  auction->add_option("--tau-lo", auction_cfg.tau_lo, "Quantile range lower edge");
  auction->add_option("--tau-hi", auction_cfg.tau_hi, "Quantile range upper edge");
  auction->add_option("--x-trim", auction_cfg.x_trim,
                      "Covariate quantile trim defining the test region");
  add_common_test_flags(auction, auction_cfg);
  add_io_options(auction, auction_io, true);

  auto* did = app.add_subcommand(
      "test-did", "H0: difference-in-differences in conditional quantiles >= 0");
  did->add_option("--data", did_cfg.data, "CSV with columns y, x1..xd, period[, weight]");
  did->add_option("--period-t", did_cfg.period_t, "Later period label");
  did->add_option("--period-s", did_cfg.period_s, "Earlier period label");
  did->add_option("--poly-order", did_cfg.poly_order, "Local polynomial order r");
  did->add_option("--h-t", did_cfg.h_t, "Bandwidth for period t");
  did->add_option("--h-s", did_cfg.h_s, "Bandwidth for period s");
  did->add_option("--x-lo", did_cfg.x_lo, "Test region lower edge (default data range)");
  did->add_option("--x-hi", did_cfg.x_hi, "Test region upper edge");
  did->add_option("--ntau", did_cfg.ntau, "Quantile grid resolution (median row pinned)");
  did->add_option("--tau-lo", did_cfg.tau_lo, "Quantile range lower edge");
  did->add_option("--tau-hi", did_cfg.tau_hi, "Quantile range upper edge");
  add_common_test_flags(did, did_cfg);
  add_io_options(did, did_io, true);

  auto* sim = app.add_subcommand("simulate", "Coverage experiments on the built-in designs");
  sim->add_option("--dgp", sim_cfg.dgps, "Designs to run (1..4)");
  sim->add_option("--n", sim_cfg.ns, "Sample sizes");
  sim->add_option("--reps", sim_cfg.reps, "Monte Carlo replications");
  sim->add_option("--ccs", sim_cfg.ccs, "C_cs values (shared draws across values)");
  sim->add_option("--theta-mode", sim_cfg.theta_mode, "cp, fcp, or both");
  sim->add_option("--boot", sim_cfg.boot, "Bootstrap replications");
  sim->add_option("--alpha", sim_cfg.alpha, "Nominal level");
  sim->add_option("--seed", sim_cfg.seed, "Master seed");
  sim->add_option("--nx", sim_cfg.nx, "Covariate grid resolution");
  sim->add_option("--workers", sim_cfg.workers, "Worker threads (0 = auto)");
  sim->add_flag("--long", sim_cfg.long_protocol, "Full protocol: all designs and sizes, 1000 reps");
  sim->add_option("--csv-out", sim_csv_out, "Per-replication rejection flags CSV path");
  add_io_options(sim, sim_io, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fitest::cli::kConfigError;
  }

  try {
    if (mean->parsed()) {
      fitest::cli::MeanConfig cfg = mean_io.config_path.empty()
                                        ? mean_cfg
                                        : fitest::cli::mean_config_from_json(
                                              load_config_file(mean_io.config_path));
      emit(fitest::cli::run_mean_command(cfg), mean_io);
    } else if (auction->parsed()) {
      fitest::cli::AuctionConfig cfg = auction_io.config_path.empty()
                                           ? auction_cfg
                                           : fitest::cli::auction_config_from_json(
                                                 load_config_file(auction_io.config_path));
      emit(fitest::cli::run_auction_command(cfg), auction_io);
    } else if (did->parsed()) {
      fitest::cli::DidConfig cfg = did_io.config_path.empty()
                                       ? did_cfg
                                       : fitest::cli::did_config_from_json(
                                             load_config_file(did_io.config_path));
      emit(fitest::cli::run_did_command(cfg), did_io);
    } else if (sim->parsed()) {
      fitest::cli::SimulateConfig cfg = sim_io.config_path.empty()
                                            ? sim_cfg
                                            : fitest::cli::simulate_config_from_json(
                                                  load_config_file(sim_io.config_path));
      const auto result = fitest::cli::run_simulate_command(cfg);
      emit(result, sim_io);
      if (!sim_csv_out.empty())
        write_text(sim_csv_out, fitest::cli::simulate_replications_csv(result.report));
    }
  } catch (const fitest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return fitest::cli::kConfigError;
  } catch (const fitest::DataError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return fitest::cli::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << std::endl;
    return fitest::cli::kNumericError;
  }
  return fitest::cli::kOk;
}
