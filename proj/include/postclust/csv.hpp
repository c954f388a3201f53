#ifndef POSTCLUST_CSV_HPP
#define POSTCLUST_CSV_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace postclust {

// Numeric CSV with a mandatory header row: observations as rows, features as
// columns, comma separator, '.' decimal point.
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;

    int column(const std::string& name) const; // -1 when missing
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

std::vector<std::string> default_header(const std::string& prefix, int count);

} // namespace postclust

#endif
