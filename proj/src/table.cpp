#include "confound/table.hpp"

#include <cstdio>
#include <fstream>

#include "confound/errors.hpp"

namespace confound {

void Table::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw ValidationError("table: row width does not match column count");
    rows.push_back(std::move(row));
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const std::string& path, const Table& table, char delimiter) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out << delimiter;
        out << table.columns[j];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << delimiter;
            out << format_double(row[j]);
        }
        out << "\n";
    }
}

}  // namespace confound
