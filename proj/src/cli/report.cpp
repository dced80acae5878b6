#include <cmath>
#include <cstdio>
#include <sstream>

#include "conescale/cli.hpp"
#include "conescale/error.hpp"

namespace conescale::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Keeps "-0" out of the reports.
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Report::meta(const std::string& key, const std::string& value) {
  if (value.find('\n') != std::string::npos) throw ValidationError("metadata values must be one line");
  meta_.emplace_back(key, value);
}

void Report::meta(const std::string& key, double value) { meta(key, format_double(value)); }

void Report::begin_table(const std::string& name, std::vector<std::string> header) {
  tables_.push_back(Table{name, std::move(header), {}});
}

void Report::row(std::vector<std::string> cells) {
  if (tables_.empty() || cells.size() != tables_.back().header.size())
    throw ValidationError("report row does not match the table header");
  tables_.back().rows.push_back(std::move(cells));
}

void Report::row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(format_double(v));
  row(std::move(s));
}

std::string Report::render() const {
  std::ostringstream out;
  for (const auto& [k, v] : meta_) out << "# " << k << "=" << v << "\n";
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    const Table& tab = tables_[t];
    if (t > 0) out << "\n";
    out << "# table=" << tab.name << "\n";
    for (std::size_t c = 0; c < tab.header.size(); ++c) out << (c ? "," : "") << tab.header[c];
    out << "\n";
    for (const auto& r : tab.rows) {
      for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace conescale::cli
