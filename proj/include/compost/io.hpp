#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace compost::io {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::filesystem::path& path, std::size_t line, const std::string& msg)
        : std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + msg),
          line(line) {}

    std::size_t line;
};

/// Numeric table parsed from delimited text. Rows are cells, columns are
/// samples. Delimiter is sniffed (tab, comma, semicolon, else whitespace) and
/// a non-numeric first line is treated as a header.
struct Table {
    Eigen::MatrixXd values;
    std::vector<std::string> header;  // empty when the file had none
    char delimiter = ',';
};

Table read_table(const std::filesystem::path& path);

/// 17 significant digits; round-trips doubles exactly.
std::string format_full(double v);

/// Writes via a temp file in the same directory plus rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v);
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  char delimiter = ',');

}  // namespace compost::io
