#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xsdist/point_cloud.hpp"

namespace xsdist {

/// Identifies a reproducible random stream. Identical (value, stream_id)
/// always reproduce identical sample sequences, independent of thread count.
struct Seed {
    std::uint64_t value = 0;
    std::uint64_t stream_id = 0;

    Seed with_stream(std::uint64_t id) const { return {value, id}; }
};

/// Counter-based generator (Philox 4x32, 10 rounds). Every output is a pure
/// function of (seed, stream, sample index, draw index), so parallel workers
/// can draw from disjoint sample ranges without coordination.
class Philox {
public:
    explicit Philox(Seed seed);

    /// Raw 128-bit block for counter (sample, block).
    std::array<std::uint32_t, 4> block(std::uint64_t sample, std::uint32_t block_idx) const;

    /// Uniform in (0,1); draw indexes a 64-bit lane (two per block).
    double uniform(std::uint64_t sample, std::uint32_t draw) const;

    /// Standard normal pair from one block (Box-Muller).
    std::array<double, 2> normal_pair(std::uint64_t sample, std::uint32_t pair_idx) const;

    Seed seed() const { return seed_; }

private:
    Seed seed_;
    std::uint32_t key0_, key1_;
};

/// Sequential view over the draw space of one sample. Permits rejection
/// sampling with data-dependent consumption while remaining a pure function
/// of (seed, sample).
class SampleCursor {
public:
    SampleCursor(const Philox& gen, std::uint64_t sample)
        : gen_(&gen), sample_(sample) {}

    double uniform();
    double normal();
    /// Gamma(shape, 1) via Marsaglia-Tsang, with the shape<1 boost.
    double gamma(double shape);
    /// Chi-square with integer degrees of freedom (sum of squared normals).
    double chi_square(int dof);
    /// Student-t with (possibly fractional) dof > 0.
    double student_t(double dof);

private:
    const Philox* gen_;
    std::uint64_t sample_;
    std::uint32_t next_pair_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
    std::uint32_t next_uniform_ = 0x40000000u;  // uniforms live in their own draw range
};

/// One uniform direction on S^{N-1} (index-addressable, pure).
Direction sample_direction(int n_dim, const Philox& gen, std::uint64_t index);

/// M uniform directions on S^{N-1}.
std::vector<Direction> sample_sphere(int n_dim, std::size_t count, Seed seed);

/// count i.i.d. N(0, I_n) points.
PointCloud sample_normal_cloud(int n_dim, std::size_t count, Seed seed);

}  // namespace xsdist
