#include "fitest/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "fitest/common.hpp"

namespace fitest {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, std::size_t row, const std::string& col,
                    const std::string& name) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << name << ": non-numeric cell in column '" << col << "', data row " << row + 1 << ": '"
        << cell << "'";
    throw DataError(msg.str());
  }
  return v;
}

long parse_long(const std::string& cell, std::size_t row, const std::string& col,
                const std::string& name) {
  long v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    std::ostringstream msg;
    msg << name << ": non-integer cell in column '" << col << "', data row " << row + 1 << ": '"
        << cell << "'";
    throw DataError(msg.str());
  }
  return v;
}

struct Header {
  std::vector<std::string> names;

  std::size_t require(const std::string& col, const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == col) return i;
    throw DataError(name + ": missing required column '" + col + "'");
  }
  bool has(const std::string& col) const {
    return std::find(names.begin(), names.end(), col) != names.end();
  }
  std::vector<std::size_t> x_columns(const std::string& name) const {
    std::vector<std::size_t> cols;
    for (std::size_t d = 1;; ++d) {
      const std::string key = "x" + std::to_string(d);
      if (!has(key)) break;
      cols.push_back(require(key, name));
    }
    if (cols.empty()) throw DataError(name + ": missing required column 'x1'");
    return cols;
  }
};

std::vector<std::vector<std::string>> read_rows(std::istream& in, Header& header,
                                                const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty file");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto& n : split_line(line)) header.names.push_back(n);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.names.size()) {
      std::ostringstream msg;
      msg << name << ": data row " << rows.size() + 1 << " has " << cells.size()
          << " cells, expected " << header.names.size();
      throw DataError(msg.str());
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw DataError(name + ": no data rows");
  return rows;
}

IngestResult ingest_mean(const std::vector<std::vector<std::string>>& rows, const Header& h,
                         const std::string& name) {
  const std::size_t yc = h.require("y", name);
  const auto xc = h.x_columns(name);
  IngestResult out{Sample(xc.size()), rows.size(), {}};
  std::vector<double> x(xc.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t d = 0; d < xc.size(); ++d)
      x[d] = parse_double(rows[r][xc[d]], r, h.names[xc[d]], name);
    out.sample.add_row(parse_double(rows[r][yc], r, "y", name), x);
  }
  return out;
}

IngestResult ingest_did(const std::vector<std::vector<std::string>>& rows, const Header& h,
                        const std::string& name) {
  const std::size_t yc = h.require("y", name);
  const std::size_t pc = h.require("period", name);
  const auto xc = h.x_columns(name);
  const bool has_w = h.has("weight");
  const std::size_t wc = has_w ? h.require("weight", name) : 0;
  IngestResult out{Sample(xc.size(), true), rows.size(), {}};
  std::vector<double> x(xc.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t d = 0; d < xc.size(); ++d)
      x[d] = parse_double(rows[r][xc[d]], r, h.names[xc[d]], name);
    const long period = parse_long(rows[r][pc], r, "period", name);
    const double w = has_w ? parse_double(rows[r][wc], r, "weight", name) : 1.0;
    out.sample.add_row(parse_double(rows[r][yc], r, "y", name), x, w, period);
    ++out.group_counts[period];
  }
  return out;
}

IngestResult ingest_auction(const std::vector<std::vector<std::string>>& rows, const Header& h,
                            const std::string& name) {
  const std::size_t bc = h.require("bid", name);
  const std::size_t ac = h.require("auction_id", name);
  const std::size_t nc = h.require("n_bidders", name);
  const auto xc = h.x_columns(name);

  struct AuctionAccum {
    std::vector<double> bids;
    std::vector<double> x;
    long n_bidders = 0;
    std::size_t first_row = 0;
  };
  std::vector<long> order;
  std::map<long, AuctionAccum> auctions;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const long id = parse_long(rows[r][ac], r, "auction_id", name);
    const long nb = parse_long(rows[r][nc], r, "n_bidders", name);
    std::vector<double> x(xc.size());
    for (std::size_t d = 0; d < xc.size(); ++d)
      x[d] = parse_double(rows[r][xc[d]], r, h.names[xc[d]], name);
    auto it = auctions.find(id);
    if (it == auctions.end()) {
      order.push_back(id);
      AuctionAccum acc;
      acc.x = x;
      acc.n_bidders = nb;
      acc.first_row = r;
      it = auctions.emplace(id, std::move(acc)).first;
    } else {
      if (it->second.n_bidders != nb)
        throw DataError(name + ": auction_id " + std::to_string(id) +
                        " has inconsistent n_bidders");
      if (it->second.x != x)
        throw DataError(name + ": auction_id " + std::to_string(id) +
                        " has inconsistent covariates");
    }
    it->second.bids.push_back(parse_double(rows[r][bc], r, "bid", name));
  }

  IngestResult out{Sample(xc.size(), true), rows.size(), {}};
  for (long id : order) {
    const AuctionAccum& acc = auctions.at(id);
    if (static_cast<long>(acc.bids.size()) != acc.n_bidders) {
      std::ostringstream msg;
      msg << name << ": auction_id " << id << " declares " << acc.n_bidders << " bidders but has "
          << acc.bids.size() << " bid rows";
      throw DataError(msg.str());
    }
    out.sample.add_row(acc.bids, acc.x, 1.0, acc.n_bidders);
    ++out.group_counts[acc.n_bidders];
  }
  return out;
}

}  // namespace

IngestResult ingest_csv_stream(std::istream& in, CsvSchema schema, const std::string& name) {
  Header header;
  const auto rows = read_rows(in, header, name);
  IngestResult out = schema == CsvSchema::kMean      ? ingest_mean(rows, header, name)
                     : schema == CsvSchema::kAuction ? ingest_auction(rows, header, name)
                                                     : ingest_did(rows, header, name);
  out.sample.validate();
  return out;
}

IngestResult ingest_csv(const std::string& path, CsvSchema schema) {
  std::ifstream in(path);
  if (!in) throw DataError("ingest_csv: cannot open '" + path + "'");
  return ingest_csv_stream(in, schema, path);
}

}  // namespace fitest
