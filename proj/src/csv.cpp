#include "irlab/csv.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace irlab::csv {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_matrix(std::ostream& out, const ApMatrix& m) {
  out << "system";
  for (const auto& t : m.topics()) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.systems()[i];
    for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << format_number(m.at(i, j));
    out << '\n';
  }
}

void write_vector(std::ostream& out, const EffVector& v) {
  out << "label,value\n";
  for (std::size_t i = 0; i < v.labels.size(); ++i)
    out << v.labels[i] << ',' << format_number(v.values[i]) << '\n';
}

void write_series(std::ostream& out, const std::vector<subset::SeriesRow>& rows,
                  const subset::ParetoArchive* best, const subset::ParetoArchive* worst) {
  out << "cardinality,best,worst,mean,p01,p99\n";
  for (const auto& r : rows) {
    out << r.cardinality << ',';
    if (best) {
      auto v = best->value_at(r.cardinality);
      out << (v ? format_number(*v) : "");
    }
    out << ',';
    if (worst) {
      auto v = worst->value_at(r.cardinality);
      out << (v ? format_number(*v) : "");
    }
    out << ',' << format_number(r.mean) << ',' << format_number(r.p01) << ','
        << format_number(r.p99) << '\n';
  }
}

ApMatrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix csv: empty stream");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
    return out;
  };
  auto header = split(line);
  if (header.size() < 2 || header[0] != "system")
    throw ParseError("matrix csv: header must start with 'system'");
  std::vector<std::string> topics(header.begin() + 1, header.end());

  std::vector<std::string> systems;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split(line);
    if (cols.size() != topics.size() + 1)
      throw ParseError("matrix csv line " + std::to_string(lineno) + ": wrong column count");
    systems.push_back(cols[0]);
    std::vector<double> vals;
    for (std::size_t j = 1; j < cols.size(); ++j) {
      try {
        vals.push_back(std::stod(cols[j]));
      } catch (...) {
        throw ParseError("matrix csv line " + std::to_string(lineno) + ": bad number '" + cols[j] +
                         "'");
      }
    }
    rows.push_back(std::move(vals));
  }
  ApMatrix m(systems, topics);
  for (std::size_t i = 0; i < systems.size(); ++i)
    for (std::size_t j = 0; j < topics.size(); ++j) m.at(i, j) = rows[i][j];
  return m;
}

}  // namespace irlab::csv
