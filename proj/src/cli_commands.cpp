#include "fitest/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "fitest/applications.hpp"
#include "fitest/common.hpp"
#include "fitest/csv.hpp"
#include "fitest/montecarlo.hpp"
#include "fitest/numerics.hpp"

namespace fitest::cli {

namespace {

// Strict reader: every get() marks its key, finish() rejects leftovers.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(where_ + ": bad value for key '" + std::string(key) + "'");
    }
  }

  template <typename T>
  void get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(where_ + ": bad value for key '" + std::string(key) + "'");
    }
  }

  void expect_command(const char* name) {
    seen_.insert("command");
    if (!j_.contains("command")) throw ConfigError(where_ + ": missing 'command'");
    if (j_.at("command") != name)
      throw ConfigError(where_ + ": config is for command '" +
                        j_.at("command").get<std::string>() + "', expected '" + name + "'");
  }

  void expect_version() {
    seen_.insert("version");
    if (!j_.contains("version")) throw ConfigError(where_ + ": missing 'version'");
    if (!j_.at("version").is_number_integer() || j_.at("version").get<int>() != 1)
      throw ConfigError(where_ + ": unsupported config version");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void validate_options(const TestOptions& o) {
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (o.p < 1) throw ConfigError("p must be >= 1");
  if (o.form != "sum" && o.form != "max") throw ConfigError("form must be 'sum' or 'max'");
  if (o.boot < 1) throw ConfigError("boot must be >= 1");
  if (!(o.eta > 0.0)) throw ConfigError("eta must be > 0");
  if (o.nx < 2) throw ConfigError("nx must be >= 2");
  if (!(o.ccs > 0.0)) throw ConfigError("ccs must be > 0");
  if (!(o.mass_floor >= 0.0)) throw ConfigError("mass-floor must be >= 0");
}

LambdaForm parse_form(const std::string& s) {
  return s == "max" ? LambdaForm::kMax : LambdaForm::kSum;
}

Json options_to_json(const TestOptions& o) {
  Json j;
  j["alpha"] = o.alpha;
  j["p"] = o.p;
  j["form"] = o.form;
  j["ccs"] = o.ccs;
  j["boot"] = o.boot;
  j["seed"] = o.seed;
  j["eta"] = o.eta;
  j["workers"] = o.workers;
  j["mass_floor"] = o.mass_floor;
  j["nx"] = o.nx;
  return j;
}

void options_from_reader(StrictObject& r, TestOptions& o) {
  r.get("alpha", o.alpha);
  r.get("p", o.p);
  r.get("form", o.form);
  r.get("ccs", o.ccs);
  r.get("boot", o.boot);
  r.get("seed", o.seed);
  r.get("eta", o.eta);
  r.get("workers", o.workers);
  r.get("mass_floor", o.mass_floor);
  r.get("nx", o.nx);
}

TestSpec make_spec(const TestOptions& o) {
  TestSpec spec;
  spec.p = o.p;
  spec.form = parse_form(o.form);
  spec.alpha = o.alpha;
  spec.eta = o.eta;
  spec.c_cs = o.ccs;
  spec.n_boot = static_cast<std::size_t>(o.boot);
  return spec;
}

Json summarize_result(const TestResult& res) {
  Json j;
  j["theta_hat"] = res.theta_hat;
  j["reject"] = res.reject;
  j["p_value"] = res.p_value;
  j["c_alpha_star"] = res.summary.c_alpha_star;
  j["c_alpha_eta_star"] = res.summary.c_alpha_eta_star;
  j["a_star"] = res.summary.a_star;
  j["c_hat_n"] = res.contact.c_hat_n;
  j["eta_floor"] = res.diagnostics.eta_floor;
  Json lfc;
  lfc["c_alpha_star"] = res.summary.c_alpha_lfc;
  lfc["c_alpha_eta_star"] = res.summary.c_alpha_eta_lfc;
  lfc["a_star"] = res.summary.a_star_lfc;
  lfc["reject"] = res.diagnostics.reject_lfc;
  lfc["p_value"] = res.diagnostics.p_value_lfc;
  j["lfc"] = lfc;
  Json diag;
  diag["grid_size"] = res.diagnostics.grid_size;
  diag["unusable_points"] = res.diagnostics.unusable_points;
  diag["degenerate_fits"] = res.diagnostics.degenerate_fits;
  diag["boot_degenerate_fits"] = res.diagnostics.boot_degenerate_fits;
  diag["tuning_sample_size"] = res.diagnostics.tuning_sample_size;
  j["diagnostics"] = diag;
  j["theta_star"] = res.summary.theta_star;
  j["theta_star_lfc"] = res.summary.theta_star_lfc;
  j["sup_stats"] = res.summary.sup_stats;
  return j;
}

Json make_report(Json config_echo, Json payload, std::uint64_t seed, double wall_seconds) {
  Json doc;
  doc["fitest_version"] = kVersion;
  doc["config"] = std::move(config_echo);
  doc["seed"] = seed;
  doc["result"] = std::move(payload);
  doc["wall_clock_seconds"] = wall_seconds;
  return doc;
}

std::string format_contact_label(std::uint32_t mask) {
  if (mask == 0) return "";
  std::string s;
  for (std::size_t j = 0; j < 32; ++j)
    if ((mask >> j) & 1u) s += std::to_string(j + 1);
  return s;
}

std::string grid_csv(const TestResult& res, const EvalGrid& grid, const FieldStack& u_hat) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t d = 0; d < grid.dim(); ++d) out << "x" << d + 1 << ",";
  out << "tau";
  for (std::size_t j = 0; j < u_hat.J; ++j) out << ",u_hat" << j + 1;
  out << ",usable,contact_set\n";
  std::vector<double> x(grid.dim());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.x_at(p, x);
    for (double xv : x) out << xv << ",";
    out << grid.tau_at(p);
    for (std::size_t j = 0; j < u_hat.J; ++j) out << "," << u_hat.u[j][p];
    out << "," << int(u_hat.usable[p]) << "," << format_contact_label(res.contact.label[p])
        << "\n";
  }
  return out.str();
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace

// --- config round trips -------------------------------------------------------

Json to_json(const MeanConfig& c) {
  Json j;
  j["command"] = "test-mean";
  j["version"] = 1;
  j["data"] = c.data;
  j["theta"] = c.theta;
  j["h"] = c.h ? Json(*c.h) : Json(nullptr);
  j["x_lo"] = c.x_lo ? Json(*c.x_lo) : Json(nullptr);
  j["x_hi"] = c.x_hi ? Json(*c.x_hi) : Json(nullptr);
  j.update(options_to_json(c.opt));
  return j;
}

MeanConfig mean_config_from_json(const Json& j) {
  StrictObject r(j, "test-mean config");
  r.expect_command("test-mean");
  r.expect_version();
  MeanConfig c;
  r.get("data", c.data);
  r.get("theta", c.theta);
  r.get_optional("h", c.h);
  r.get_optional("x_lo", c.x_lo);
  r.get_optional("x_hi", c.x_hi);
  options_from_reader(r, c.opt);
  r.finish();
  if (c.data.empty()) throw ConfigError("test-mean: missing 'data'");
  validate_options(c.opt);
  return c;
}

Json to_json(const AuctionConfig& c) {
  Json j;
  j["command"] = "test-auction";
  j["version"] = 1;
  j["data"] = c.data;
  j["poly_order"] = c.poly_order;
  j["h"] = c.h ? Json(*c.h) : Json(nullptr);
  j["b_lower"] = c.b_lower ? Json(*c.b_lower) : Json(nullptr);
  j["normalize_x"] = c.normalize_x;
  j["ntau"] = c.ntau;
  j["tau_lo"] = c.tau_lo;
  j["tau_hi"] = c.tau_hi;
  j["x_trim"] = c.x_trim;
  j.update(options_to_json(c.opt));
  return j;
}

AuctionConfig auction_config_from_json(const Json& j) {
  StrictObject r(j, "test-auction config");
  r.expect_command("test-auction");
  r.expect_version();
  AuctionConfig c;
  r.get("data", c.data);
  r.get("poly_order", c.poly_order);
  r.get_optional("h", c.h);
  r.get_optional("b_lower", c.b_lower);
  r.get("normalize_x", c.normalize_x);
  r.get("ntau", c.ntau);
  r.get("tau_lo", c.tau_lo);
  r.get("tau_hi", c.tau_hi);
  r.get("x_trim", c.x_trim);
  options_from_reader(r, c.opt);
  r.finish();
  if (c.data.empty()) throw ConfigError("test-auction: missing 'data'");
  if (c.poly_order < 0) throw ConfigError("test-auction: poly_order must be >= 0");
  if (c.ntau < 1) throw ConfigError("test-auction: ntau must be >= 1");
  if (!(c.x_trim >= 0.0 && c.x_trim < 0.5)) throw ConfigError("test-auction: x_trim in [0,0.5)");
  validate_options(c.opt);
  return c;
}

Json to_json(const DidConfig& c) {
  Json j;
  j["command"] = "test-did";
  j["version"] = 1;
  j["data"] = c.data;
  j["period_t"] = c.period_t;
  j["period_s"] = c.period_s;
  j["poly_order"] = c.poly_order;
  j["h_t"] = c.h_t ? Json(*c.h_t) : Json(nullptr);
  j["h_s"] = c.h_s ? Json(*c.h_s) : Json(nullptr);
  j["x_lo"] = c.x_lo ? Json(*c.x_lo) : Json(nullptr);
  j["x_hi"] = c.x_hi ? Json(*c.x_hi) : Json(nullptr);
  j["ntau"] = c.ntau;
  j["tau_lo"] = c.tau_lo;
  j["tau_hi"] = c.tau_hi;
  j.update(options_to_json(c.opt));
  return j;
}

DidConfig did_config_from_json(const Json& j) {
  StrictObject r(j, "test-did config");
  r.expect_command("test-did");
  r.expect_version();
  DidConfig c;
  r.get("data", c.data);
  r.get("period_t", c.period_t);
  r.get("period_s", c.period_s);
  r.get("poly_order", c.poly_order);
  r.get_optional("h_t", c.h_t);
  r.get_optional("h_s", c.h_s);
  r.get_optional("x_lo", c.x_lo);
  r.get_optional("x_hi", c.x_hi);
  r.get("ntau", c.ntau);
  r.get("tau_lo", c.tau_lo);
  r.get("tau_hi", c.tau_hi);
  options_from_reader(r, c.opt);
  r.finish();
  if (c.data.empty()) throw ConfigError("test-did: missing 'data'");
  if (c.period_t == c.period_s) throw ConfigError("test-did: periods must differ");
  validate_options(c.opt);
  return c;
}

Json to_json(const SimulateConfig& c) {
  Json j;
  j["command"] = "simulate";
  j["version"] = 1;
  j["dgps"] = c.dgps;
  j["ns"] = c.ns;
  j["reps"] = c.reps;
  j["ccs"] = c.ccs;
  j["theta_mode"] = c.theta_mode;
  j["boot"] = c.boot;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  j["nx"] = c.nx;
  j["workers"] = c.workers;
  j["long_protocol"] = c.long_protocol;
  return j;
}

SimulateConfig simulate_config_from_json(const Json& j) {
  StrictObject r(j, "simulate config");
  r.expect_command("simulate");
  r.expect_version();
  SimulateConfig c;
  r.get("dgps", c.dgps);
  r.get("ns", c.ns);
  r.get("reps", c.reps);
  r.get("ccs", c.ccs);
  r.get("theta_mode", c.theta_mode);
  r.get("boot", c.boot);
  r.get("alpha", c.alpha);
  r.get("seed", c.seed);
  r.get("nx", c.nx);
  r.get("workers", c.workers);
  r.get("long_protocol", c.long_protocol);
  r.finish();
  for (int d : c.dgps)
    if (d < 1 || d > 4) throw ConfigError("simulate: dgps entries must be 1..4");
  if (c.dgps.empty() || c.ns.empty() || c.ccs.empty())
    throw ConfigError("simulate: dgps, ns and ccs must be nonempty");
  if (c.reps < 1) throw ConfigError("simulate: reps must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("simulate: alpha outside (0,1)");
  if (c.boot < 1) throw ConfigError("simulate: boot must be >= 1");
  if (c.theta_mode != "cp" && c.theta_mode != "fcp" && c.theta_mode != "both")
    throw ConfigError("simulate: theta_mode must be cp, fcp or both");
  return c;
}

// --- commands -------------------------------------------------------------------

CommandOutput run_mean_command(const MeanConfig& cfg) {
  Timer timer;
  const IngestResult data = ingest_csv(cfg.data, CsvSchema::kMean);
  const Sample& sample = data.sample;
  if (sample.dim() != 1 && (!cfg.x_lo || !cfg.x_hi))
    throw ConfigError("test-mean: explicit x_lo/x_hi required when d > 1");

  MeanConfig resolved = cfg;
  if (!resolved.h)
    resolved.h = rule_of_thumb_bandwidth(sample.covariate_column(0), 2.0, -0.2);
  if (!resolved.x_lo || !resolved.x_hi) {
    const auto xs = sample.covariate_column(0);
    resolved.x_lo = *std::min_element(xs.begin(), xs.end());
    resolved.x_hi = *std::max_element(xs.begin(), xs.end());
  }
  const EvalGrid grid = make_mean_grid(*resolved.x_lo, *resolved.x_hi, resolved.opt.nx);
  const MeanFieldBuilder builder(sample, {resolved.theta, resolved.opt.mass_floor}, grid,
                                 *resolved.h);
  const TestSpec spec = make_spec(resolved.opt);
  const RandomSource rng(resolved.opt.seed);
  const PreparedTest prep =
      prepare_test(sample, builder, grid, spec, rng, resolved.opt.workers);
  const TestResult res = finalize_test(prep, grid, spec);

  Json payload = summarize_result(res);
  payload["n"] = sample.size();
  CommandOutput out;
  out.report = make_report(to_json(resolved), std::move(payload), resolved.opt.seed,
                           timer.seconds());
  out.grid_csv = grid_csv(res, grid, prep.u_hat);
  return out;
}

CommandOutput run_auction_command(const AuctionConfig& cfg) {
  Timer timer;
  const IngestResult data = ingest_csv(cfg.data, CsvSchema::kAuction);
  Sample sample = data.sample;
  if (cfg.normalize_x) sample = normalize_covariate_gauss_rank(sample);

  AuctionConfig resolved = cfg;
  if (!resolved.h)
    resolved.h = rule_of_thumb_bandwidth(sample.covariate_column(0), 2.0, -0.2);
  const EvalGrid grid = make_auction_grid(sample, resolved.opt.nx, resolved.ntau,
                                          resolved.tau_lo, resolved.tau_hi, resolved.x_trim);
  AuctionSpec aspec;
  aspec.poly_order = resolved.poly_order;
  aspec.mass_floor_obs = resolved.opt.mass_floor;
  if (resolved.b_lower) {
    aspec.b_lower_mode = BLowerMode::kSupplied;
    aspec.b_lower_supplied = *resolved.b_lower;
  }
  const AuctionFieldBuilder builder(sample, aspec, grid, *resolved.h);
  const TestSpec spec = make_spec(resolved.opt);
  const RandomSource rng(resolved.opt.seed);
  const PreparedTest prep =
      prepare_test(sample, builder, grid, spec, rng, resolved.opt.workers);
  const TestResult res = finalize_test(prep, grid, spec);

  Json payload = summarize_result(res);
  payload["n_auctions"] = sample.size();
  payload["n_bids"] = sample.total_outcomes();
  Json groups;
  for (const auto& [k, v] : data.group_counts) groups[std::to_string(k)] = v;
  payload["auctions_by_bidder_count"] = groups;
  CommandOutput out;
  out.report = make_report(to_json(resolved), std::move(payload), resolved.opt.seed,
                           timer.seconds());
  out.grid_csv = grid_csv(res, grid, prep.u_hat);
  return out;
}

CommandOutput run_did_command(const DidConfig& cfg) {
  Timer timer;
  const IngestResult data = ingest_csv(cfg.data, CsvSchema::kDid);
  const Sample& sample = data.sample;

  DidConfig resolved = cfg;
  auto period_column = [&](long period) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < sample.size(); ++i)
      if (sample.group(i) == period) xs.push_back(sample.x(i)[0]);
    if (xs.empty())
      throw DataError("test-did: no rows in period " + std::to_string(period));
    return xs;
  };
  if (!resolved.h_t) resolved.h_t = rule_of_thumb_bandwidth(period_column(cfg.period_t), 2.0, -0.2);
  if (!resolved.h_s) resolved.h_s = rule_of_thumb_bandwidth(period_column(cfg.period_s), 2.0, -0.2);
  if (!resolved.x_lo || !resolved.x_hi) {
    const auto xs = sample.covariate_column(0);
    resolved.x_lo = *std::min_element(xs.begin(), xs.end());
    resolved.x_hi = *std::max_element(xs.begin(), xs.end());
  }
  const EvalGrid grid = make_did_grid(*resolved.x_lo, *resolved.x_hi, resolved.opt.nx,
                                      resolved.ntau, resolved.tau_lo, resolved.tau_hi);
  DiDSpec dspec;
  dspec.period_t = resolved.period_t;
  dspec.period_s = resolved.period_s;
  dspec.h_t = *resolved.h_t;
  dspec.h_s = *resolved.h_s;
  dspec.poly_order = resolved.poly_order;
  dspec.mass_floor_obs = resolved.opt.mass_floor;
  const DiDFieldBuilder builder(sample, dspec, grid);
  const TestSpec spec = make_spec(resolved.opt);
  const RandomSource rng(resolved.opt.seed);
  const PreparedTest prep =
      prepare_test(sample, builder, grid, spec, rng, resolved.opt.workers);
  const TestResult res = finalize_test(prep, grid, spec);

  Json payload = summarize_result(res);
  payload["n"] = sample.size();
  Json groups;
  for (const auto& [k, v] : data.group_counts) groups[std::to_string(k)] = v;
  payload["rows_by_period"] = groups;
  CommandOutput out;
  out.report = make_report(to_json(resolved), std::move(payload), resolved.opt.seed,
                           timer.seconds());
  out.grid_csv = grid_csv(res, grid, prep.u_hat);
  return out;
}

CommandOutput run_simulate_command(const SimulateConfig& cfg) {
  Timer timer;
  SimulateConfig resolved = cfg;
  if (resolved.long_protocol) {
    resolved.dgps = {1, 2, 3, 4};
    resolved.ns = {100, 250, 500, 1000};
    resolved.ccs = {0.4, 0.5, 0.6};
    resolved.reps = 1000;
    resolved.theta_mode = "both";
  }
  std::vector<ThetaMode> modes;
  if (resolved.theta_mode == "cp" || resolved.theta_mode == "both")
    modes.push_back(ThetaMode::kCp);
  if (resolved.theta_mode == "fcp" || resolved.theta_mode == "both")
    modes.push_back(ThetaMode::kFcp);

  Json experiments = Json::array();
  for (int dgp : resolved.dgps) {
    for (std::size_t n : resolved.ns) {
      for (ThetaMode mode : modes) {
        ExperimentConfig ec;
        ec.dgp = dgp_by_number(dgp);
        ec.dgp.n = n;
        ec.n_mc = resolved.reps;
        ec.n_boot = static_cast<std::size_t>(resolved.boot);
        ec.c_cs = resolved.ccs;
        ec.alpha = resolved.alpha;
        ec.theta_mode = mode;
        ec.master_seed = resolved.seed;
        ec.nx = resolved.nx;
        const ExperimentReport rep = run_experiment(ec, resolved.workers);
        Json je;
        je["dgp"] = dgp;
        je["n"] = n;
        je["mode"] = mode == ThetaMode::kCp ? "cp" : "fcp";
        je["theta"] = rep.theta;
        je["wall_seconds"] = rep.wall_seconds;
        Json cells = Json::array();
        for (const auto& cell : rep.cells) {
          Json jc;
          jc["ccs"] = cell.c_cs;
          jc["n_mc"] = cell.n_mc;
          jc["rejections"] = cell.rejections;
          jc["coverage"] = cell.coverage;
          jc["mc_se"] = cell.mc_se;
          cells.push_back(jc);
        }
        je["cells"] = cells;
        Json flags = Json::array();
        for (const auto& per_ccs : rep.reject) {
          std::string bits(per_ccs.size(), '0');
          for (std::size_t i = 0; i < per_ccs.size(); ++i)
            if (per_ccs[i]) bits[i] = '1';
          flags.push_back(bits);
        }
        je["reject_flags"] = flags;
        experiments.push_back(std::move(je));
      }
    }
  }
  Json payload;
  payload["experiments"] = std::move(experiments);
  CommandOutput out;
  out.report =
      make_report(to_json(resolved), std::move(payload), resolved.seed, timer.seconds());
  return out;
}

std::string simulate_replications_csv(const Json& report) {
  std::ostringstream out;
  out << "dgp,n,mode,ccs,replication,reject\n";
  for (const auto& je : report.at("result").at("experiments")) {
    const auto& cells = je.at("cells");
    const auto& flags = je.at("reject_flags");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string bits = flags.at(c).get<std::string>();
      for (std::size_t r = 0; r < bits.size(); ++r)
        out << je.at("dgp") << "," << je.at("n") << "," << je.at("mode").get<std::string>()
            << "," << cells.at(c).at("ccs") << "," << r << "," << bits[r] << "\n";
    }
  }
  return out.str();
}

}  // namespace fitest::cli
