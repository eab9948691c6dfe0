#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xsdist {

/// K points in R^N stored row-major, carrying the empirical measure
/// (1/K) sum_k delta_{x_k}. All coordinates must be finite.
class PointCloud {
public:
    PointCloud() = default;
    PointCloud(std::size_t count, std::size_t dim);

    /// Takes ownership of row-major data; throws std::invalid_argument on
    /// shape mismatch or non-finite coordinates.
    static PointCloud from_rows(std::vector<double> data, std::size_t dim);

    std::size_t count() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> row(std::size_t k) const {
        return {data_.data() + k * dim_, dim_};
    }
    std::span<double> row(std::size_t k) { return {data_.data() + k * dim_, dim_}; }

    double& at(std::size_t k, std::size_t d) { return data_[k * dim_ + d]; }
    double at(std::size_t k, std::size_t d) const { return data_[k * dim_ + d]; }

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    /// Throws std::invalid_argument if any coordinate is NaN or infinite.
    void validate() const;

private:
    std::vector<double> data_;
    std::size_t dim_ = 0;
};

/// Unit vector on S^{N-1}; ||theta|| = 1 within 1e-12 by construction.
struct Direction {
    std::vector<double> theta;

    std::size_t dim() const { return theta.size(); }
};

double squared_norm(std::span<const double> v);
double norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace xsdist
