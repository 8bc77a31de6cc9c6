#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

namespace npgraph {

// 17-significant-digit decimal form that round-trips doubles exactly.
// NaN and infinities render as NaN / Inf / -Inf.
std::string format_double(double v);

// Escapes a string cell for CSV (quotes it when it contains separators).
std::string csv_escape(const std::string& cell);

void ensure_directory(const std::filesystem::path& dir);
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// Dense matrix with a header row of generated column names (prefix + index).
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::string& column_prefix = "v");
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXi& m,
                      const std::string& column_prefix = "v");

// Reads a dense numeric CSV, skipping one header row when the first line is
// not fully numeric. Ragged rows, non-numeric cells, and NaNs are data
// errors naming the offending row and column.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace npgraph
