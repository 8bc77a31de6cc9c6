#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "common.hpp"

namespace npgraph {

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), ErrorCode::io_error,
          "cannot create directory " + dir.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  require(out.good(), ErrorCode::io_error, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  require(!in.bad(), ErrorCode::io_error, "failed reading " + path.string());
  return buffer.str();
}

namespace {

template <typename Matrix, typename Formatter>
void write_csv_impl(const std::filesystem::path& path, const Matrix& m,
                    const std::string& prefix, Formatter format) {
  std::string out;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c > 0) out += ',';
    out += prefix + std::to_string(c + 1);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format(m(r, c));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::string& column_prefix) {
  write_csv_impl(path, m, column_prefix, [](double v) { return format_double(v); });
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXi& m,
                      const std::string& column_prefix) {
  write_csv_impl(path, m, column_prefix, [](int v) { return std::to_string(v); });
}

namespace {

bool parse_cell(const std::string& cell, double& value) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  value = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::io_error,
          "input file not found: " + path.string());
  std::ifstream in(path);
  require(in.good(), ErrorCode::io_error, "cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (!header_checked) {
      header_checked = true;
      bool all_numeric = true;
      double ignored;
      for (const auto& cell : cells) {
        if (!parse_cell(cell, ignored)) {
          all_numeric = false;
          break;
        }
      }
      if (!all_numeric) continue;  // header row
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      require(parse_cell(cells[c], v), ErrorCode::data_error,
              path.string() + ": non-numeric cell at row " + std::to_string(line_number) +
                  ", column " + std::to_string(c + 1));
      require(!std::isnan(v), ErrorCode::data_error,
              path.string() + ": NaN at row " + std::to_string(line_number) + ", column " +
                  std::to_string(c + 1));
      values[c] = v;
    }
    if (!rows.empty()) {
      require(values.size() == rows.front().size(), ErrorCode::data_error,
              path.string() + ": row " + std::to_string(line_number) + " has " +
                  std::to_string(values.size()) + " cells, expected " +
                  std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(values));
  }
  require(!rows.empty(), ErrorCode::data_error, path.string() + ": no data rows");

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

}  // namespace npgraph
