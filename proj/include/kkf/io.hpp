#ifndef KKF_IO_HPP
#define KKF_IO_HPP

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kkf/common.hpp"

namespace kkf {

using Json = nlohmann::json;

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j) {
    require(j.is_array(), "matrix_from_json: expected array of rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        require(static_cast<Eigen::Index>(j.at(i).size()) == cols,
                "matrix_from_json: ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

inline Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline Vector vector_from_json(const Json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

/// Minimal CSV emitter: header row mandatory, UTF-8, '.' decimal separator.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw ConfigError("cannot open CSV file for writing: " + path);
        out_ << std::setprecision(17);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
        columns_ = header.size();
    }

    template <typename... Fields>
    void row(const Fields&... fields) {
        std::ostringstream line;
        line << std::setprecision(17);
        std::size_t count = 0;
        ((line << (count++ ? "," : "") << fields), ...);
        require(count == columns_, "CSV row field count does not match header");
        out_ << line.str() << "\n";
    }

    void row(const std::vector<std::string>& fields) {
        require(fields.size() == columns_, "CSV row field count does not match header");
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open file for writing: " + path);
    out << content;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file for reading: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace kkf

#endif
