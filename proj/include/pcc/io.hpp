#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pcc::io {

// Malformed CSV input. The message names the offending line (1-based,
// counting the header).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Table {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows x columns
};

// Header row of column names followed by comma-separated decimal numbers.
// Blank lines are skipped; any non-numeric or non-finite field is rejected.
Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

// Full round-trip precision (17 significant digits).
void write_csv(std::ostream& out, const Table& table);
void write_csv_file(const std::string& path, const Table& table);

// Rows whose entries are all strictly positive.
Table drop_nonpositive_rows(const Table& table);

}  // namespace pcc::io
