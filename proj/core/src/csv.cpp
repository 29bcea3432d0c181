#include "sqmc/csv.hpp"

#include <cstdio>
#include <algorithm>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sqmc {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw std::runtime_error("csv: unexpected header '" + line + "', want '" + std::string(header) + "'");
}

// Calls f(fields, line_number) for each non-empty data line with `width` fields.
template <typename F>
void for_each_row(std::istream& in, std::size_t width, F&& f) {
  std::string line;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = fields(line);
    if (cells.size() != width)
      throw std::runtime_error("csv: line " + std::to_string(number) + " has " +
                               std::to_string(cells.size()) + " fields, want " +
                               std::to_string(width));
    try {
      f(cells);
    } catch (const std::logic_error&) {
      throw std::runtime_error("csv: bad value on line " + std::to_string(number));
    }
  }
}

double to_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); }

}  // namespace

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << kRunCsvHeader << '\n';
  for (const auto& r : rows)
    out << r.model << ',' << r.engine << ',' << r.formalism << ',' << r.construction << ','
        << r.particles << ',' << r.steps << ',' << r.horizon << ',' << r.t << ','
        << r.replication << ',' << fmt(r.estimate_mean_x1) << ',' << fmt(r.log_likelihood) << '\n';
}

std::vector<RunRow> read_runs_csv(std::istream& in) {
  expect_header(in, kRunCsvHeader);
  std::vector<RunRow> rows;
  for_each_row(in, 11, [&](const std::vector<std::string>& c) {
    RunRow r;
    r.model = c[0];
    r.engine = c[1];
    r.formalism = c[2];
    r.construction = c[3];
    r.particles = to_size(c[4]);
    r.steps = to_size(c[5]);
    r.horizon = to_size(c[6]);
    r.t = to_size(c[7]);
    r.replication = to_size(c[8]);
    r.estimate_mean_x1 = to_double(c[9]);
    r.log_likelihood = to_double(c[10]);
    rows.push_back(std::move(r));
  });
  return rows;
}

void write_report_csv(std::ostream& out, const GainTable& table) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : table.rows)
    out << r.model << ',' << r.engine << ',' << r.particles << ',' << r.t << ',' << fmt(r.mse)
        << ',' << fmt(r.variance) << ',' << fmt(r.gain) << '\n';
}

GainTable read_report_csv(std::istream& in) {
  expect_header(in, kReportCsvHeader);
  GainTable table;
  for_each_row(in, 7, [&](const std::vector<std::string>& c) {
    GainRow r;
    r.model = c[0];
    r.engine = c[1];
    r.particles = to_size(c[2]);
    r.t = to_size(c[3]);
    r.mse = to_double(c[4]);
    r.variance = to_double(c[5]);
    r.gain = to_double(c[6]);
    r.degenerate = r.variance == 0.0;
    table.rows.push_back(std::move(r));
  });
  return table;
}

void write_gain_summary_csv(std::ostream& out, const std::vector<GainSummary>& summary) {
  out << "engine,N,median_gain,q1,q3\n";
  for (const auto& s : summary)
    out << s.engine << ',' << s.particles << ',' << fmt(s.median) << ',' << fmt(s.q1) << ','
        << fmt(s.q3) << '\n';
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << 't';
  for (std::size_t j = 0; j < data.observations.cols(); ++j) out << ",y" << j + 1;
  out << '\n';
  for (std::size_t t = 0; t < data.observations.rows(); ++t) {
    out << t;
    for (const double v : data.observations.row(t)) out << ',' << fmt(v);
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, ModelId model) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("csv: missing header");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto names = fields(header);
  if (names.size() < 2 || names[0] != "t")
    throw std::runtime_error("csv: dataset header must be t,y1,...");
  const std::size_t d = names.size() - 1;
  std::vector<double> values;
  std::size_t rows = 0;
  for_each_row(in, d + 1, [&](const std::vector<std::string>& c) {
    if (to_size(c[0]) != rows)
      throw std::runtime_error("csv: dataset time index " + c[0] + " out of sequence");
    for (std::size_t j = 1; j <= d; ++j) values.push_back(to_double(c[j]));
    ++rows;
  });
  Dataset data;
  data.model = model;
  data.observations = RowMatrix(rows, d);
  std::copy(values.begin(), values.end(), data.observations.data().begin());
  return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_dataset_csv(out, data);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path, ModelId model) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset_csv(in, model);
}

}  // namespace sqmc
