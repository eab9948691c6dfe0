#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "xsdist/errors.hpp"
#include "xsdist/train.hpp"

namespace xsdist {

PointCloud eight_gaussians(std::size_t count, double radius, double sigma, Seed seed) {
    const Philox gen(seed);
    PointCloud cloud(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
        SampleCursor cur(gen, i);
        const int mode = static_cast<int>(cur.uniform() * 8.0) % 8;
        const double angle = 2.0 * std::numbers::pi * mode / 8.0;
        cloud.at(i, 0) = radius * std::cos(angle) + sigma * cur.normal();
        cloud.at(i, 1) = radius * std::sin(angle) + sigma * cur.normal();
    }
    return cloud;
}

PointCloud two_moons(std::size_t count, double noise, Seed seed) {
    const Philox gen(seed);
    PointCloud cloud(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
        SampleCursor cur(gen, i);
        const bool upper = cur.uniform() < 0.5;
        const double t = std::numbers::pi * cur.uniform();
        double x, y;
        if (upper) {
            x = std::cos(t);
            y = std::sin(t);
        } else {
            x = 1.0 - std::cos(t);
            y = 0.5 - std::sin(t);
        }
        cloud.at(i, 0) = x + noise * cur.normal();
        cloud.at(i, 1) = y + noise * cur.normal();
    }
    return cloud;
}

PointCloud spherical_shell(std::size_t count, int n_dim, double radius, double thickness,
                           Seed seed) {
    const Philox gen(seed);
    PointCloud cloud(count, static_cast<std::size_t>(n_dim));
    for (std::size_t i = 0; i < count; ++i) {
        const Direction dir = sample_direction(n_dim, gen, i);
        SampleCursor cur(gen, i + (static_cast<std::uint64_t>(1) << 40));
        const double r = radius + thickness * (cur.uniform() - 0.5);
        for (int d = 0; d < n_dim; ++d) cloud.at(i, d) = r * dir.theta[d];
    }
    return cloud;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) throw IoError(path + ": truncated idx header");
    return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char buf[4] = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

PointCloud read_idx_images(const std::string& path, std::size_t max_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    if (read_be32(in, path) != 0x00000803u)
        throw IoError(path + ": not an idx image file (bad magic)");
    const std::uint32_t n = read_be32(in, path);
    const std::uint32_t rows = read_be32(in, path);
    const std::uint32_t cols = read_be32(in, path);
    std::size_t count = n;
    if (max_count > 0) count = std::min<std::size_t>(count, max_count);
    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    PointCloud images(count, dim);
    std::vector<unsigned char> buf(dim);
    for (std::size_t i = 0; i < count; ++i) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim)))
            throw IoError(path + ": truncated image data");
        auto row = images.row(i);
        for (std::size_t d = 0; d < dim; ++d) row[d] = buf[d] / 255.0;
    }
    return images;
}

std::vector<int> read_idx_labels(const std::string& path, std::size_t max_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    if (read_be32(in, path) != 0x00000801u)
        throw IoError(path + ": not an idx label file (bad magic)");
    const std::uint32_t n = read_be32(in, path);
    std::size_t count = n;
    if (max_count > 0) count = std::min<std::size_t>(count, max_count);
    std::vector<int> labels(count);
    for (std::size_t i = 0; i < count; ++i) {
        char c;
        if (!in.get(c)) throw IoError(path + ": truncated label data");
        labels[i] = static_cast<unsigned char>(c);
    }
    return labels;
}

void write_idx_images(const std::string& path, const PointCloud& images, int rows, int cols) {
    if (static_cast<std::size_t>(rows) * cols != images.dim())
        throw std::invalid_argument("write_idx_images: rows*cols must equal image dim");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_be32(out, 0x00000803u);
    write_be32(out, static_cast<std::uint32_t>(images.count()));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    for (std::size_t i = 0; i < images.count(); ++i)
        for (const double v : images.row(i)) {
            const double clamped = std::min(1.0, std::max(0.0, v));
            out.put(static_cast<char>(static_cast<int>(std::lround(clamped * 255.0))));
        }
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_be32(out, 0x00000801u);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int label : labels) out.put(static_cast<char>(label));
}

}  // namespace xsdist
