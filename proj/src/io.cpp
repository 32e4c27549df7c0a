#include "compost/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace compost::io {

namespace {

bool parse_double(std::string_view tok, double& out) {
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

char sniff_delimiter(const std::string& line) {
    if (line.find('\t') != std::string::npos) return '\t';
    if (line.find(',') != std::string::npos) return ',';
    if (line.find(';') != std::string::npos) return ';';
    return ' ';
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    if (delim == ' ') {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
            if (j > i) out.push_back(line.substr(i, j - i));
            i = j;
        }
        return out;
    }
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");

    Table table;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool sniffed = false;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view trimmed = trim(line);
        if (trimmed.empty()) continue;
        if (!sniffed) {
            table.delimiter = sniff_delimiter(line);
            sniffed = true;
        }
        const auto fields = split_fields(trimmed, table.delimiter);
        if (fields.empty()) continue;

        std::vector<double> row;
        row.reserve(fields.size());
        bool numeric = true;
        for (const auto& f : fields) {
            double v;
            if (!parse_double(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && table.header.empty()) {
                for (const auto& f : fields) table.header.emplace_back(f);
                continue;
            }
            throw ParseError(path, line_no, "non-numeric field");
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw ParseError(path, line_no,
                             "expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path, line_no, "no numeric rows");

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
    return table;
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path dir = path.parent_path();
    if (dir.empty()) dir = ".";
    std::filesystem::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
    std::string out;
    out.reserve(static_cast<std::size_t>(v.size()) * 24);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += format_full(v[i]);
        out += '\n';
    }
    write_text_atomic(path, out);
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  char delimiter) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size()) * 24);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += delimiter;
            out += format_full(m(r, c));
        }
        out += '\n';
    }
    write_text_atomic(path, out);
}

}  // namespace compost::io
