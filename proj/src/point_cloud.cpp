#include "xsdist/point_cloud.hpp"

#include <cmath>
#include <stdexcept>

namespace xsdist {

PointCloud::PointCloud(std::size_t count, std::size_t dim)
    : data_(count * dim, 0.0), dim_(dim) {
    if (dim == 0) throw std::invalid_argument("PointCloud: dim must be >= 1");
}

PointCloud PointCloud::from_rows(std::vector<double> data, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("PointCloud: dim must be >= 1");
    if (data.size() % dim != 0)
        throw std::invalid_argument("PointCloud: data size not a multiple of dim");
    PointCloud cloud;
    cloud.data_ = std::move(data);
    cloud.dim_ = dim;
    cloud.validate();
    return cloud;
}

void PointCloud::validate() const {
    for (double v : data_)
        if (!std::isfinite(v))
            throw std::invalid_argument("PointCloud: non-finite coordinate");
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace xsdist
