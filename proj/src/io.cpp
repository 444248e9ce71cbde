#include "pcc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>

namespace pcc::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void fail(long line, const std::string& msg) {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    long lineno = 0;
    bool have_header = false;
    std::vector<double> flat;

    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        // UTF-8 byte order mark on the first line.
        if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (trim(view).empty()) continue;

        auto fields = split(view);
        if (!have_header) {
            for (auto f : fields) {
                if (f.empty()) fail(lineno, "empty column name in header");
                t.columns.emplace_back(f);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != t.columns.size()) {
            fail(lineno, "expected " + std::to_string(t.columns.size()) + " fields, found " +
                             std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            auto f = fields[j];
            if (!f.empty() && f.front() == '+') f.remove_prefix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
                fail(lineno, "column '" + t.columns[j] + "': cannot parse '" + std::string(fields[j]) +
                                 "' as a number");
            }
            if (!std::isfinite(v)) fail(lineno, "column '" + t.columns[j] + "': non-finite value");
            flat.push_back(v);
        }
    }
    if (!have_header) throw ParseError("empty input: no header row");

    const auto cols = static_cast<Eigen::Index>(t.columns.size());
    const auto rows = static_cast<Eigen::Index>(flat.size()) / cols;
    t.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), rows, cols);
    return t;
}

Table read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_csv(in);
}

void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out << ',';
        out << table.columns[j];
    }
    out << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            if (j) out << ',';
            const auto res = std::to_chars(buf, buf + sizeof buf, table.values(i, j),
                                           std::chars_format::general,
                                           std::numeric_limits<double>::max_digits10);
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

void write_csv_file(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(out, table);
}

Table drop_nonpositive_rows(const Table& table) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        if ((table.values.row(i).array() > 0.0).all()) keep.push_back(i);
    }
    return {table.columns, table.values(keep, Eigen::all)};
}

}  // namespace pcc::io
