#pragma once

#include <istream>
#include <map>
#include <string>

#include "fitest/sample.hpp"

namespace fitest {

// Column layouts (header row required, extra columns ignored):
//   mean:    y, x1..xd
//   auction: bid, x1..xd, auction_id, n_bidders  (one row per bid; rows of an
//            auction share covariates and n_bidders, and the bid count must
//            equal n_bidders)
//   did:     y, x1..xd, period, weight (optional)
enum class CsvSchema { kMean, kAuction, kDid };

struct IngestResult {
  Sample sample;
  std::size_t csv_rows = 0;                 // data rows read
  std::map<long, std::size_t> group_counts; // auctions per bidder count / rows per period
};

IngestResult ingest_csv(const std::string& path, CsvSchema schema);
IngestResult ingest_csv_stream(std::istream& in, CsvSchema schema, const std::string& name);

}  // namespace fitest
