#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fitest/cli.hpp"
#include "fitest/common.hpp"
#include "fitest/csv.hpp"
#include "fitest/rng.hpp"

using namespace fitest;
using fitest::cli::Json;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name, const std::string& content) {
    path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::error_code ec; std::filesystem::remove(path, ec); }
};

Json strip_wall_clock(Json doc) {
  doc.erase("wall_clock_seconds");
  if (doc.contains("result") && doc["result"].contains("wall_seconds"))
    doc["result"].erase("wall_seconds");
  return doc;
}

std::string small_mean_csv(std::size_t n, std::uint64_t seed) {
  RandomSource rng(seed);
  std::ostringstream out;
  out << "y,x1\n";
  out.precision(17);
  for (std::size_t i = 0; i < n; ++i)
    out << rng.normal() << "," << rng.uniform(-1.0, 1.0) << "\n";
  return out.str();
}

}  // namespace

TEST_CASE("csv ingestion: mean schema") {
  TempFile f("fitest_mean.csv", "y,x1\n1.5,0.2\n-0.5,0.7\n");
  const IngestResult r = ingest_csv(f.path.string(), CsvSchema::kMean);
  CHECK(r.sample.size() == 2);
  CHECK(r.csv_rows == 2);
  CHECK(r.sample.y_scalar(0) == 1.5);
  CHECK(r.sample.x(1)[0] == 0.7);
}

TEST_CASE("csv ingestion: errors name the offender") {
  TempFile missing("fitest_m1.csv", "y,z\n1,2\n");
  CHECK_THROWS_WITH_AS(ingest_csv(missing.path.string(), CsvSchema::kMean),
                       doctest::Contains("x1"), DataError);

  TempFile bad("fitest_m2.csv", "y,x1\n1,0.1\nfoo,0.2\n");
  CHECK_THROWS_WITH_AS(ingest_csv(bad.path.string(), CsvSchema::kMean),
                       doctest::Contains("row 2"), DataError);

  TempFile nop("fitest_m3.csv", "y,x1\n");
  CHECK_THROWS_AS(ingest_csv(nop.path.string(), CsvSchema::kMean), DataError);

  // auction: a 3-bidder auction with two bid rows
  TempFile auc("fitest_a1.csv",
               "bid,x1,auction_id,n_bidders\n1.0,0.5,7,3\n2.0,0.5,7,3\n"
               "1.0,0.3,8,2\n2.0,0.3,8,2\n");
  CHECK_THROWS_WITH_AS(ingest_csv(auc.path.string(), CsvSchema::kAuction),
                       doctest::Contains("auction_id 7"), DataError);

  // did without the period column
  TempFile did("fitest_d1.csv", "y,x1\n1,2\n");
  CHECK_THROWS_WITH_AS(ingest_csv(did.path.string(), CsvSchema::kDid),
                       doctest::Contains("period"), DataError);
}

TEST_CASE("csv ingestion: auction grouping and did weights") {
  TempFile auc("fitest_a2.csv",
               "bid,x1,auction_id,n_bidders,region\n"
               "1.0,0.5,1,2,9\n2.0,0.5,1,2,9\n"
               "3.0,0.2,2,3,9\n4.0,0.2,2,3,9\n5.0,0.2,2,3,9\n");
  const IngestResult r = ingest_csv(auc.path.string(), CsvSchema::kAuction);
  CHECK(r.sample.size() == 2);  // two auctions
  CHECK(r.sample.total_outcomes() == 5);
  CHECK(r.sample.y(0).size() == 2);
  CHECK(r.sample.group(1) == 3);
  CHECK(r.group_counts.at(2) == 1);
  CHECK(r.group_counts.at(3) == 1);

  TempFile did("fitest_d2.csv",
               "y,x1,period,weight\n1.0,30,1974,2.5\n2.0,40,1988,1.0\n");
  const IngestResult rd = ingest_csv(did.path.string(), CsvSchema::kDid);
  CHECK(rd.sample.weight(0) == 2.5);
  CHECK(rd.sample.group(0) == 1974);
  CHECK(rd.group_counts.at(1988) == 1);
}

TEST_CASE("config round trips are idempotent and strict") {
  cli::MeanConfig mc;
  mc.data = "data.csv";
  mc.theta = 0.4;
  mc.opt.seed = 9;
  const Json j1 = cli::to_json(mc);
  const cli::MeanConfig back = cli::mean_config_from_json(j1);
  CHECK(cli::to_json(back) == j1);

  Json bad = j1;
  bad["not_a_key"] = 1;
  CHECK_THROWS_AS(cli::mean_config_from_json(bad), ConfigError);

  Json wrong = j1;
  wrong["alpha"] = 1.5;
  CHECK_THROWS_AS(cli::mean_config_from_json(wrong), ConfigError);

  cli::AuctionConfig ac;
  ac.data = "a.csv";
  ac.b_lower = 0.25;
  CHECK(cli::to_json(cli::auction_config_from_json(cli::to_json(ac))) == cli::to_json(ac));

  cli::DidConfig dc;
  dc.data = "d.csv";
  dc.period_t = 1988;
  dc.period_s = 1974;
  CHECK(cli::to_json(cli::did_config_from_json(cli::to_json(dc))) == cli::to_json(dc));

  cli::SimulateConfig sc;
  sc.dgps = {1, 3};
  sc.reps = 7;
  CHECK(cli::to_json(cli::simulate_config_from_json(cli::to_json(sc))) == cli::to_json(sc));

  Json sim_bad = cli::to_json(sc);
  sim_bad["dgps"] = {5};
  CHECK_THROWS_AS(cli::simulate_config_from_json(sim_bad), ConfigError);
}

TEST_CASE("test-mean command: fixed seed gives byte-identical reports") {
  TempFile data("fitest_cmd.csv", small_mean_csv(60, 321));
  cli::MeanConfig cfg;
  cfg.data = data.path.string();
  cfg.theta = 0.0;
  cfg.opt.boot = 40;
  cfg.opt.nx = 21;
  cfg.opt.seed = 5;
  cfg.opt.workers = 2;
  const auto r1 = cli::run_mean_command(cfg);
  const auto r2 = cli::run_mean_command(cfg);
  CHECK(strip_wall_clock(r1.report).dump() == strip_wall_clock(r2.report).dump());
  CHECK(r1.grid_csv == r2.grid_csv);
  // echoed config reproduces the payload when re-ingested
  const cli::MeanConfig echoed = cli::mean_config_from_json(r1.report.at("config"));
  const auto r3 = cli::run_mean_command(echoed);
  CHECK(strip_wall_clock(r3.report).at("result").dump() ==
        strip_wall_clock(r1.report).at("result").dump());
  // grid diagnostics carry one line per grid point plus a header
  std::size_t lines = 0;
  for (char ch : r1.grid_csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 21 + 1);
  CHECK(r1.report.at("result").contains("theta_hat"));
  CHECK(r1.report.at("fitest_version") == std::string(kVersion));
}

TEST_CASE("simulate command: records every replication") {
  cli::SimulateConfig sc;
  sc.dgps = {1};
  sc.ns = {50};
  sc.reps = 2;
  sc.ccs = {0.5};
  sc.boot = 30;
  sc.nx = 21;
  sc.seed = 8;
  sc.workers = 2;
  const auto out = cli::run_simulate_command(sc);
  const auto& exp = out.report.at("result").at("experiments").at(0);
  CHECK(exp.at("cells").at(0).at("n_mc") == 2);
  CHECK(exp.at("reject_flags").at(0).get<std::string>().size() == 2);
  const std::string csv = cli::simulate_replications_csv(out.report);
  std::size_t lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 1 + 2);  // header + one line per replication
}

TEST_CASE("exit code taxonomy is pinned") {
  CHECK(cli::kOk == 0);
  CHECK(cli::kConfigError == 2);
  CHECK(cli::kDataError == 3);
  CHECK(cli::kNumericError == 4);
}
