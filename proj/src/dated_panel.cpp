#include "robcov/dated_panel.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "robcov/error.hpp"
#include "robcov/metrics.hpp"

namespace robcov {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    cells.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const std::chrono::year_month_day ymd{
      std::chrono::year{std::stoi(s.substr(0, 4))},
      std::chrono::month{static_cast<unsigned>(std::stoi(s.substr(5, 2)))},
      std::chrono::day{static_cast<unsigned>(std::stoi(s.substr(8, 2)))}};
  return ymd.ok();
}

DatedPanel DatedPanel::slice(Eigen::Index begin, Eigen::Index end) const {
  DatedPanel out;
  out.assets = assets;
  out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.returns = returns.middleRows(begin, end - begin);
  return out;
}

DatedPanel parse_dated_csv(std::istream& in) {
  DatedPanel panel;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input: missing header", 1);
  ++line_no;
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "date") {
    throw ParseError("header must be 'date,<asset ids...>'", line_no);
  }
  panel.assets.assign(header.begin() + 1, header.end());
  const std::size_t p = panel.assets.size();

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != p + 1) {
      throw ParseError("expected " + std::to_string(p + 1) + " fields, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    if (!is_iso_date(cells[0])) throw ParseError("invalid date '" + cells[0] + "'", line_no);
    if (!panel.dates.empty() && !(panel.dates.back() < cells[0])) {
      throw ParseError("dates must be strictly ascending ('" + cells[0] + "' after '" +
                           panel.dates.back() + "')",
                       line_no);
    }
    panel.dates.push_back(cells[0]);
    for (std::size_t j = 1; j <= p; ++j) {
      double v = 0.0;
      const auto& c = cells[j];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v)) {
        throw ParseError("invalid return value '" + c + "' for asset " + panel.assets[j - 1],
                         line_no);
      }
      values.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(panel.dates.size());
  panel.returns = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(values.data(), n,
                                                                   static_cast<Eigen::Index>(p));
  return panel;
}

DatedPanel read_dated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return parse_dated_csv(in);
}

void write_dated_csv(std::ostream& out, const DatedPanel& panel) {
  out << "date";
  for (const auto& a : panel.assets) out << ',' << a;
  out << '\n';
  for (Eigen::Index t = 0; t < panel.n(); ++t) {
    out << panel.dates[static_cast<std::size_t>(t)];
    for (Eigen::Index j = 0; j < panel.p(); ++j) out << ',' << format_full(panel.returns(t, j));
    out << '\n';
  }
}

}  // namespace robcov
