#include "xsdist/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "xsdist/errors.hpp"

namespace xsdist {

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
    out.clear();
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string field = line.substr(pos, comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            return false;
        }
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
        if (used != field.size()) return false;
        out.push_back(v);
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    return !out.empty();
}

}  // namespace

PointCloud read_cloud_csv(std::istream& in, const std::string& origin) {
    std::string line;
    std::vector<double> data;
    std::vector<double> row;
    std::size_t dim = 0;
    std::size_t declared_dim = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("dim=");
            if (pos != std::string::npos)
                declared_dim = static_cast<std::size_t>(std::stoul(line.substr(pos + 4)));
            continue;
        }
        if (!parse_row(line, row))
            throw IoError(origin + ":" + std::to_string(line_no) + ": malformed row");
        if (dim == 0) {
            dim = row.size();
        } else if (row.size() != dim) {
            throw IoError(origin + ":" + std::to_string(line_no) + ": ragged row (expected " +
                          std::to_string(dim) + " fields, got " + std::to_string(row.size()) + ")");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    if (dim == 0) throw IoError(origin + ": no data rows");
    if (declared_dim != 0 && declared_dim != dim)
        throw IoError(origin + ": header dim=" + std::to_string(declared_dim) +
                      " disagrees with row width " + std::to_string(dim));
    try {
        return PointCloud::from_rows(std::move(data), dim);
    } catch (const std::invalid_argument& e) {
        throw IoError(origin + ": " + e.what());
    }
}

PointCloud read_cloud_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_cloud_csv(in, path);
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
    out << "# dim=" << cloud.dim() << "\n";
    for (std::size_t k = 0; k < cloud.count(); ++k) {
        const auto r = cloud.row(k);
        for (std::size_t d = 0; d < r.size(); ++d) {
            if (d) out << ',';
            out << format17(r[d]);
        }
        out << "\n";
    }
}

void write_cloud_csv_file(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_cloud_csv(out, cloud);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace xsdist
