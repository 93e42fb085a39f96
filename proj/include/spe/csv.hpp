#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spe::csv {

/// RFC-4180 field: quoted when it contains a comma, quote, CR or LF.
std::string quote(std::string_view field);

/// Shortest decimal that round-trips the double.
std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Headerless numeric matrix, one row per line.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// Splits one RFC-4180 record (no embedded newlines).
std::vector<std::string> split_record(std::string_view line);

}  // namespace spe::csv
