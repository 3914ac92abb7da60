#pragma once

#include <string>
#include <vector>

namespace confound {

/// Small column-named numeric table for the plot-ready CSV outputs.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
};

std::string format_double(double v);

void write_csv(const std::string& path, const Table& table, char delimiter = ',');

}  // namespace confound
