#pragma once

#include <Eigen/Dense>

#include <istream>
#include <string>
#include <vector>

namespace robcov {

/// Daily returns with ISO-8601 dates, strictly ascending.
struct DatedPanel {
  std::vector<std::string> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd returns;  // dates.size() x assets.size()

  Eigen::Index n() const noexcept { return returns.rows(); }
  Eigen::Index p() const noexcept { return returns.cols(); }
  DatedPanel slice(Eigen::Index begin, Eigen::Index end) const;
};

/// Parses `date,<asset ids...>` CSV. Throws ParseError with the offending
/// line number on malformed rows, bad dates, non-finite values, or dates
/// that are not strictly ascending.
DatedPanel parse_dated_csv(std::istream& in);
DatedPanel read_dated_csv(const std::string& path);
void write_dated_csv(std::ostream& out, const DatedPanel& panel);

/// True for YYYY-MM-DD with a valid month and day-of-month range.
bool is_iso_date(const std::string& s);

}  // namespace robcov
