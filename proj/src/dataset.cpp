#include "robustde/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "robustde/errors.hpp"
#include "robustde/report.hpp"

namespace robustde {

namespace {

std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& origin,
                                        std::size_t lineno) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        throw DataError(origin + ":" + std::to_string(lineno) +
                        ": unterminated quoted field");
    }
    out.push_back(field);
    return out;
}

bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] == name) {
            return j;
        }
    }
    throw ConfigError("column '" + name + "' not found in CSV header");
}

CsvTable read_csv_table(std::istream& in, const std::string& origin) {
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (lineno == 1) {
            table.columns = split_csv_line(line, origin, lineno);
            if (table.columns.empty()) {
                throw DataError(origin + ": empty CSV header");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_csv_line(line, origin, lineno);
        if (fields.size() != table.columns.size()) {
            throw DataError(origin + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(table.columns.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (lineno == 0) {
        throw DataError(origin + ": file is empty");
    }
    return table;
}

CsvTable read_csv_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open CSV file '" + path + "'");
    }
    return read_csv_table(in, path);
}

void write_csv_table(const CsvTable& table, std::ostream& out) {
    auto write_row = [&out](const std::vector<std::string>& fields) {
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j > 0) {
                out << ',';
            }
            const std::string& f = fields[j];
            if (f.find_first_of(",\"\n") != std::string::npos) {
                out << '"';
                for (char c : f) {
                    if (c == '"') {
                        out << "\"\"";
                    } else {
                        out << c;
                    }
                }
                out << '"';
            } else {
                out << f;
            }
        }
        out << '\n';
    };
    write_row(table.columns);
    for (const auto& row : table.rows) {
        write_row(row);
    }
}

CsvTable expand_categorical(const CsvTable& table,
                            const std::vector<std::string>& columns) {
    std::set<std::size_t> expand_idx;
    std::map<std::size_t, std::vector<std::string>> levels;
    for (const auto& name : columns) {
        const std::size_t j = table.column_index(name);
        std::set<std::string> distinct;
        for (const auto& row : table.rows) {
            distinct.insert(row[j]);
        }
        if (distinct.size() < 2) {
            throw DataError("categorical column '" + name +
                            "' has fewer than two levels");
        }
        expand_idx.insert(j);
        levels[j] = std::vector<std::string>(distinct.begin(), distinct.end());
    }

    CsvTable out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (!expand_idx.count(j)) {
            out.columns.push_back(table.columns[j]);
            continue;
        }
        // First (lexicographically smallest) level is the reference.
        for (std::size_t k = 1; k < levels[j].size(); ++k) {
            out.columns.push_back(table.columns[j] + "_" + levels[j][k]);
        }
    }
    for (const auto& row : table.rows) {
        std::vector<std::string> fields;
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            if (!expand_idx.count(j)) {
                fields.push_back(row[j]);
                continue;
            }
            for (std::size_t k = 1; k < levels[j].size(); ++k) {
                fields.push_back(row[j] == levels[j][k] ? "1" : "0");
            }
        }
        out.rows.push_back(std::move(fields));
    }
    return out;
}

bool is_binary_focal(const Eigen::VectorXd& w) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] != 0.0 && w[i] != 1.0) {
            return false;
        }
    }
    return true;
}

void Dataset::validate() const {
    const Eigen::Index rows = a.size();
    if (w.size() != rows || y.size() != rows || x.rows() != rows) {
        throw DataError("dataset columns have mismatched lengths");
    }
    if (rows == 0) {
        throw DataError("dataset has no rows after complete-case filtering");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (a[i] != 0.0 && a[i] != 1.0) {
            throw DataError("exposure column must be binary 0/1; found " +
                            std::to_string(a[i]) + " at row " + std::to_string(i));
        }
        if (!std::isfinite(y[i]) || !std::isfinite(w[i])) {
            throw DataError("non-finite outcome or focal value at row " +
                            std::to_string(i));
        }
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (!std::isfinite(x(i, j))) {
                throw DataError("non-finite covariate at row " + std::to_string(i));
            }
        }
    }
    if (weight.size() > 0) {
        if (weight.size() != rows) {
            throw DataError("weight column length mismatch");
        }
        double total = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (!(weight[i] >= 0.0) || !std::isfinite(weight[i])) {
                throw DataError("weights must be finite and nonnegative; row " +
                                std::to_string(i));
            }
            total += weight[i];
        }
        if (total <= 0.0) {
            throw DataError("all weights are zero");
        }
    }
    if (!stratum.empty() &&
        (stratum.size() != static_cast<std::size_t>(rows) ||
         psu.size() != static_cast<std::size_t>(rows))) {
        throw DataError("survey design columns have mismatched lengths");
    }
}

void write_csv(const Dataset& d, std::ostream& out) {
    for (int j = 0; j < d.p(); ++j) {
        out << 'x' << j << ',';
    }
    out << "a,w,y";
    if (d.weighted()) out << ",weight";
    if (d.has_design()) out << ",stratum,psu";
    out << '\n';
    for (std::size_t i = 0; i < d.n(); ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        for (int j = 0; j < d.p(); ++j) {
            out << format_double(d.x(r, j)) << ',';
        }
        out << format_double(d.a[r]) << ',' << format_double(d.w[r]) << ','
            << format_double(d.y[r]);
        if (d.weighted()) out << ',' << format_double(d.weight[r]);
        if (d.has_design()) out << ',' << d.stratum[i] << ',' << d.psu[i];
        out << '\n';
    }
}

Dataset load_csv(const std::string& path, const ColumnSpec& spec) {
    const CsvTable table = read_csv_table_file(path);

    std::vector<std::size_t> x_idx;
    for (const auto& name : spec.x) {
        x_idx.push_back(table.column_index(name));
    }
    const std::size_t a_idx = table.column_index(spec.a);
    const std::size_t w_idx = table.column_index(spec.w);
    const std::size_t y_idx = table.column_index(spec.y);
    const bool has_weight = !spec.weight.empty();
    const bool has_stratum = !spec.stratum.empty();
    const bool has_psu = !spec.psu.empty();
    if (has_stratum != has_psu) {
        throw ConfigError("stratum and psu columns must be given together");
    }
    const std::size_t weight_idx = has_weight ? table.column_index(spec.weight) : 0;
    const std::size_t stratum_idx =
        has_stratum ? table.column_index(spec.stratum) : 0;
    const std::size_t psu_idx = has_psu ? table.column_index(spec.psu) : 0;

    std::vector<std::size_t> numeric_idx = x_idx;
    numeric_idx.push_back(a_idx);
    numeric_idx.push_back(w_idx);
    numeric_idx.push_back(y_idx);
    if (has_weight) {
        numeric_idx.push_back(weight_idx);
    }

    struct ParsedRow {
        std::vector<double> values;
        std::string stratum;
        std::string psu;
    };
    std::vector<ParsedRow> kept;
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        ParsedRow parsed;
        parsed.values.reserve(numeric_idx.size());
        bool missing = false;
        for (const std::size_t j : numeric_idx) {
            if (is_missing(row[j])) {
                missing = true;
                break;
            }
            double v = 0.0;
            if (!parse_double(row[j], v)) {
                throw DataError(path + ": row " + std::to_string(r + 2) +
                                ", column '" + table.columns[j] +
                                "': cannot parse '" + row[j] + "' as a number");
            }
            if (!std::isfinite(v)) {
                missing = true;
                break;
            }
            parsed.values.push_back(v);
        }
        if (!missing && has_stratum) {
            if (is_missing(row[stratum_idx]) || is_missing(row[psu_idx])) {
                missing = true;
            } else {
                parsed.stratum = row[stratum_idx];
                parsed.psu = row[psu_idx];
            }
        }
        if (missing) {
            ++dropped;
            continue;
        }
        kept.push_back(std::move(parsed));
    }

    Dataset d;
    const std::size_t n = kept.size();
    const std::size_t p = x_idx.size();
    d.x.resize(n, p);
    d.a.resize(n);
    d.w.resize(n);
    d.y.resize(n);
    if (has_weight) {
        d.weight.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& vals = kept[i].values;
        for (std::size_t j = 0; j < p; ++j) {
            d.x(i, j) = vals[j];
        }
        d.a[i] = vals[p];
        d.w[i] = vals[p + 1];
        d.y[i] = vals[p + 2];
        if (has_weight) {
            d.weight[i] = vals[p + 3];
        }
        if (has_stratum) {
            d.stratum.push_back(kept[i].stratum);
            d.psu.push_back(kept[i].psu);
        }
    }
    d.dropped_rows = dropped;
    d.validate();
    return d;
}

}  // namespace robustde
