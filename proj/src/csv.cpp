#include "postclust/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "postclust/errors.hpp"

namespace postclust {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_number(const std::string& cell, const std::string& path, std::size_t row) {
    double value = 0.0;
    const auto* begin = cell.data();
    const auto* end = cell.data() + cell.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end)
        throw numeric_error(path + ": row " + std::to_string(row) + ": bad numeric cell '" +
                            cell + "'");
    return value;
}

} // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<int>(j);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw numeric_error("cannot open '" + path + "'");

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw numeric_error(path + ": empty file");
    table.header = split(line);
    const std::size_t q = table.header.size();
    if (q == 0) throw numeric_error(path + ": empty header");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != q)
            throw numeric_error(path + ": row " + std::to_string(lineno) + " has " +
                                std::to_string(cells.size()) + " cells, expected " +
                                std::to_string(q));
        std::vector<double> row(q);
        for (std::size_t j = 0; j < q; ++j) row[j] = parse_number(cells[j], path, lineno);
        rows.push_back(std::move(row));
    }

    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(q));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < q; ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
    if (header.size() != static_cast<std::size_t>(values.cols()))
        throw invalid_input("write_csv: header width mismatch");
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot write '" + path + "'");
    out.precision(17);
    for (std::size_t j = 0; j < header.size(); ++j)
        out << header[j] << (j + 1 < header.size() ? "," : "\n");
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            out << values(i, j) << (j + 1 < values.cols() ? "," : "\n");
    if (!out) throw numeric_error("write failed for '" + path + "'");
}

std::vector<std::string> default_header(const std::string& prefix, int count) {
    std::vector<std::string> header;
    header.reserve(static_cast<std::size_t>(count));
    for (int j = 1; j <= count; ++j) header.push_back(prefix + std::to_string(j));
    return header;
}

} // namespace postclust
