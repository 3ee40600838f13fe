#include "fxts/problems.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fxts {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

CsvDataset load_csv_dataset(const std::filesystem::path& path, const ColumnRef& target,
                            double lambda, BadRowPolicy policy) {
  std::ifstream in(path);
  if (!in) {
    throw DatasetError(DatasetError::Kind::missing_file, "cannot open dataset: " + path.string());
  }

  CsvLoadReport report;
  std::vector<std::vector<double>> rows;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  bool first_row = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    std::vector<double> values;
    values.reserve(cells.size());
    std::size_t numeric = 0;
    for (const auto& c : cells) {
      if (auto v = parse_number(c)) {
        values.push_back(*v);
        ++numeric;
      }
    }
    if (first_row) {
      first_row = false;
      columns = cells.size();
      if (numeric == 0) {
        report.has_header = true;
        report.header = cells;
        continue;
      }
    }
    ++report.rows_read;
    if (cells.size() != columns || numeric != cells.size()) {
      if (policy == BadRowPolicy::strict) {
        throw DatasetError(DatasetError::Kind::parse,
                           path.string() + ":" + std::to_string(line_no) +
                               ": row has missing or non-numeric cells");
      }
      ++report.rows_rejected;
      report.rejected_lines.push_back(line_no);
      continue;
    }
    rows.push_back(std::move(values));
  }

  if (rows.empty()) {
    throw DatasetError(DatasetError::Kind::empty, "dataset has no valid rows: " + path.string());
  }
  if (columns < 2) {
    throw DatasetError(DatasetError::Kind::bad_target,
                       "dataset needs at least one feature column and a target column");
  }
  std::size_t t = 0;
  if (const auto* name = std::get_if<std::string>(&target)) {
    if (!report.has_header) {
      throw DatasetError(DatasetError::Kind::bad_target,
                         "target column '" + *name + "' given by name but file has no header");
    }
    const auto it = std::find(report.header.begin(), report.header.end(), *name);
    if (it == report.header.end()) {
      throw DatasetError(DatasetError::Kind::bad_target, "no column named '" + *name + "'");
    }
    t = static_cast<std::size_t>(it - report.header.begin());
  } else {
    t = std::get<std::size_t>(target);
    if (t == kLastColumn) t = columns - 1;
    if (t >= columns) {
      throw DatasetError(DatasetError::Kind::bad_target,
                         "target index " + std::to_string(t) + " out of range");
    }
  }
  report.target_index = t;

  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_feat = static_cast<Eigen::Index>(columns - 1);
  RlsInstance inst;
  inst.A.resize(n_rows, n_feat);
  inst.y0.resize(n_rows);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < columns; ++j) {
      if (j == t) {
        inst.y0[i] = r[j];
      } else {
        inst.A(i, col++) = r[j];
      }
    }
  }
  inst.M = Matrix::Identity(n_rows, n_rows);
  inst.lambda = lambda;
  validate(inst);
  return CsvDataset{std::move(inst), std::move(report)};
}

void write_csv_dataset(const std::filesystem::path& path, const RlsInstance& inst,
                       const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset: " + path.string());
  if (!header.empty()) {
    if (header.size() != static_cast<std::size_t>(inst.A.cols() + 1)) {
      throw DimensionError("write_csv_dataset: header size must be columns(A) + 1");
    }
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  char buf[32];
  for (Eigen::Index i = 0; i < inst.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < inst.A.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", inst.A(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", inst.y0[i]);
    out << buf << '\n';
  }
}

}  // namespace fxts
