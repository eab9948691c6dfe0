#include "xsdist/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xsdist {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline double to_unit_interval(std::uint64_t bits) {
    // 53 significant bits, strictly inside (0,1) so log() is safe.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox::Philox(Seed seed) : seed_(seed) {
    key0_ = static_cast<std::uint32_t>(seed.value);
    key1_ = static_cast<std::uint32_t>(seed.value >> 32);
}

std::array<std::uint32_t, 4> Philox::block(std::uint64_t sample, std::uint32_t block_idx) const {
    // Counter layout: (block within sample, sample lo, sample hi ^ stream lo, stream hi).
    std::array<std::uint32_t, 4> c = {
        block_idx,
        static_cast<std::uint32_t>(sample),
        static_cast<std::uint32_t>(sample >> 32) ^ static_cast<std::uint32_t>(seed_.stream_id),
        static_cast<std::uint32_t>(seed_.stream_id >> 32),
    };
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return c;
}

double Philox::uniform(std::uint64_t sample, std::uint32_t draw) const {
    const auto b = block(sample, draw >> 1);
    const int lane = draw & 1;
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(b[2 * lane]) << 32) | b[2 * lane + 1];
    return to_unit_interval(bits);
}

std::array<double, 2> Philox::normal_pair(std::uint64_t sample, std::uint32_t pair_idx) const {
    const auto b = block(sample, pair_idx);
    const std::uint64_t u0 = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    const std::uint64_t u1 = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    const double r = std::sqrt(-2.0 * std::log(to_unit_interval(u0)));
    const double angle = 2.0 * std::numbers::pi * to_unit_interval(u1);
    return {r * std::cos(angle), r * std::sin(angle)};
}

double SampleCursor::uniform() { return gen_->uniform(sample_, next_uniform_++); }

double SampleCursor::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const auto pair = gen_->normal_pair(sample_, next_pair_++);
    spare_normal_ = pair[1];
    has_spare_ = true;
    return pair[0];
}

double SampleCursor::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double SampleCursor::chi_square(int dof) {
    double s = 0.0;
    for (int i = 0; i < dof; ++i) {
        const double z = normal();
        s += z * z;
    }
    return s;
}

double SampleCursor::student_t(double dof) {
    const double z = normal();
    const double chi2 = 2.0 * gamma(dof / 2.0);
    return z / std::sqrt(chi2 / dof);
}

Direction sample_direction(int n_dim, const Philox& gen, std::uint64_t index) {
    Direction dir;
    dir.theta.resize(static_cast<std::size_t>(n_dim));
    SampleCursor cur(gen, index);
    for (;;) {
        for (auto& v : dir.theta) v = cur.normal();
        const double n = norm(dir.theta);
        if (n > 1e-150) {  // zero-vector draw: redraw
            for (auto& v : dir.theta) v /= n;
            return dir;
        }
    }
}

std::vector<Direction> sample_sphere(int n_dim, std::size_t count, Seed seed) {
    if (n_dim < 1) throw std::invalid_argument("sample_sphere: n_dim must be >= 1");
    const Philox gen(seed);
    std::vector<Direction> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_direction(n_dim, gen, i));
    return out;
}

PointCloud sample_normal_cloud(int n_dim, std::size_t count, Seed seed) {
    if (n_dim < 1) throw std::invalid_argument("sample_normal_cloud: n_dim must be >= 1");
    const Philox gen(seed);
    PointCloud cloud(count, static_cast<std::size_t>(n_dim));
    for (std::size_t i = 0; i < count; ++i) {
        SampleCursor cur(gen, i);
        auto row = cloud.row(i);
        for (auto& v : row) v = cur.normal();
    }
    return cloud;
}

}  // namespace xsdist
