#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace robustde {

// Column mapping from a CSV header onto analysis roles. Survey columns are
// optional; leave them empty for non-survey data.
struct ColumnSpec {
    std::vector<std::string> x;
    std::string a;
    std::string w;
    std::string y;
    std::string weight;
    std::string stratum;
    std::string psu;
};

struct Dataset {
    Eigen::MatrixXd x;  // n rows, p covariate columns
    Eigen::VectorXd a;
    Eigen::VectorXd w;
    Eigen::VectorXd y;
    Eigen::VectorXd weight;            // size 0 when unweighted
    std::vector<std::string> stratum;  // empty when no survey design
    std::vector<std::string> psu;
    std::size_t dropped_rows = 0;

    std::size_t n() const { return static_cast<std::size_t>(a.size()); }
    int p() const { return static_cast<int>(x.cols()); }
    bool weighted() const { return weight.size() > 0; }
    bool has_design() const { return !stratum.empty(); }

    // Checks shape agreement, binary exposure, finite outcome, nonnegative
    // weights; throws DataError on violation.
    void validate() const;
};

bool is_binary_focal(const Eigen::VectorXd& w);

// Rows with a missing or non-finite value in any mapped column are dropped
// (complete-case); the count lands in Dataset::dropped_rows.
Dataset load_csv(const std::string& path, const ColumnSpec& spec);

// Writes columns x0..x{p-1},a,w,y plus any survey columns, with numbers in
// shortest round-trip form.
void write_csv(const Dataset& d, std::ostream& out);

// Raw string table used by the categorical expansion helper, which has to
// round-trip untouched columns byte-for-byte.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;
};

CsvTable read_csv_table(std::istream& in, const std::string& origin);
CsvTable read_csv_table_file(const std::string& path);
void write_csv_table(const CsvTable& table, std::ostream& out);

// Dummy-codes each listed column: levels are sorted lexicographically, the
// first level is the reference and is not emitted, and new columns are named
// <col>_<level> in level order.
CsvTable expand_categorical(const CsvTable& table,
                            const std::vector<std::string>& columns);

}  // namespace robustde
