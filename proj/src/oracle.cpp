#include "xsdist/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "xsdist/parallel.hpp"

namespace xsdist {

namespace {

OracleEstimate finish_estimate(double sum, double sum_sq, std::size_t n, Seed seed) {
    OracleEstimate est;
    est.n_samples = n;
    est.seed = seed;
    est.value = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - est.value * est.value);
    est.std_error = std::sqrt(var / static_cast<double>(n));
    return est;
}

}  // namespace

OracleEstimate mc_sliced_distance_sq(const PointCloud& a, const PointCloud& b,
                                     const Kernel1D& kernel1d, std::size_t n_dirs, Seed seed) {
    if (a.dim() != b.dim()) throw std::invalid_argument("mc_sliced: dimension mismatch");
    const std::size_t k_count = a.count();
    const std::size_t j_count = b.count();
    const Philox gen(seed);
    std::vector<double> proj_a(k_count), proj_b(j_count);

    auto per_direction = [&](std::uint64_t i, std::vector<double>& pa,
                             std::vector<double>& pb) {
        const Direction dir = sample_direction(static_cast<int>(a.dim()), gen, i);
        for (std::size_t k = 0; k < k_count; ++k) pa[k] = dot(a.row(k), dir.theta);
        for (std::size_t j = 0; j < j_count; ++j) pb[j] = dot(b.row(j), dir.theta);
        double cross = 0.0;
        for (std::size_t k = 0; k < k_count; ++k)
            for (std::size_t j = 0; j < j_count; ++j)
                cross += kernel1d(std::fabs(pa[k] - pb[j]));
        cross /= static_cast<double>(k_count) * static_cast<double>(j_count);
        auto self = [&](const std::vector<double>& p) {
            double s = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k)
                for (std::size_t j = k + 1; j < p.size(); ++j)
                    s += kernel1d(std::fabs(p[k] - p[j]));
            return s / (static_cast<double>(p.size()) * static_cast<double>(p.size()));
        };
        return cross - self(pa) - self(pb);
    };

    // Buffers are per-thread via thread_local copies inside the block lambda.
    auto [sum, sum_sq] = block_sum_sq(n_dirs, [&](std::size_t i) {
        thread_local std::vector<double> pa, pb;
        pa.resize(k_count);
        pb.resize(j_count);
        return per_direction(i, pa, pb);
    }, 64);
    return finish_estimate(sum, sum_sq, n_dirs, seed);
}

OracleEstimate mc_dirac_to_normal(std::span<const double> x, std::size_t n_samples, Seed seed) {
    const std::size_t n_dim = x.size();
    const Philox gen(seed);
    auto [sum, sum_sq] = block_sum_sq(n_samples, [&](std::size_t i) {
        SampleCursor cur(gen, i);
        double s = 0.0;
        for (std::size_t d = 0; d < n_dim; ++d) {
            const double diff = x[d] - cur.normal();
            s += diff * diff;
        }
        return std::sqrt(s);
    }, 1024);
    return finish_estimate(sum, sum_sq, n_samples, seed);
}

double exact_w2_sq_small(const PointCloud& a, const PointCloud& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("exact_w2_sq_small: dimension mismatch");
    if (a.count() != b.count())
        throw std::invalid_argument("exact_w2_sq_small: clouds must have equal size");
    const std::size_t k_count = a.count();
    if (k_count > 8) throw std::invalid_argument("exact_w2_sq_small: size limit is 8 points");

    std::vector<double> cost(k_count * k_count);
    for (std::size_t i = 0; i < k_count; ++i)
        for (std::size_t j = 0; j < k_count; ++j) {
            const double d = distance(a.row(i), b.row(j));
            cost[i * k_count + j] = d * d;
        }
    std::vector<std::size_t> perm(k_count);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < k_count; ++i) total += cost[i * k_count + perm[i]];
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(k_count);
}

double mixture_distance_sq(const PointCloud& mu0, const PointCloud& mu1, const PointCloud& nu,
                           double t, const RadialKernel& g) {
    const std::size_t k_count = mu0.count();
    const std::size_t j_count = mu1.count();
    PointCloud mix(k_count + j_count, mu0.dim());
    std::vector<double> weights(k_count + j_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        std::copy(mu0.row(k).begin(), mu0.row(k).end(), mix.row(k).begin());
        weights[k] = (1.0 - t) / static_cast<double>(k_count);
    }
    for (std::size_t j = 0; j < j_count; ++j) {
        std::copy(mu1.row(j).begin(), mu1.row(j).end(), mix.row(k_count + j).begin());
        weights[k_count + j] = t / static_cast<double>(j_count);
    }
    std::vector<double> w_nu(nu.count(), 1.0 / static_cast<double>(nu.count()));
    return xs_distance_sq_weighted(g, nu, w_nu, mix, weights).total;
}

std::vector<double> geodesic_identity_residual(const PointCloud& mu0, const PointCloud& mu1,
                                               const PointCloud& nu,
                                               std::span<const double> t_grid,
                                               const RadialKernel& g) {
    if (mu0.dim() != mu1.dim() || mu0.dim() != nu.dim())
        throw std::invalid_argument("geodesic_identity_residual: dimension mismatch");
    const double d_nu_mu0 = generic_xs_distance_sq(g, nu, mu0).total;
    const double d_nu_mu1 = generic_xs_distance_sq(g, nu, mu1).total;
    const double d_mu0_mu1 = generic_xs_distance_sq(g, mu0, mu1).total;
    std::vector<double> residuals;
    residuals.reserve(t_grid.size());
    for (const double t : t_grid) {
        const double lhs = mixture_distance_sq(mu0, mu1, nu, t, g);
        const double rhs =
            (1.0 - t) * d_nu_mu0 + t * d_nu_mu1 - t * (1.0 - t) * d_mu0_mu1;
        residuals.push_back(lhs - rhs);
    }
    return residuals;
}

double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> analytic_grad, std::span<const double> point,
                         double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be > 0");
    if (analytic_grad.size() != point.size())
        throw std::invalid_argument("finite_diff_check: gradient/point size mismatch");
    std::vector<double> probe(point.begin(), point.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = f(probe);
        probe[i] = saved - h;
        const double down = f(probe);
        probe[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::fabs(fd - analytic_grad[i]));
    }
    return worst;
}

PointCloud counterexample_mu(double t) {
    return PointCloud::from_rows({t, 2.0, -t, -2.0}, 2);
}

PointCloud counterexample_nu() { return PointCloud::from_rows({1.0, 0.0, -1.0, 0.0}, 2); }

double counterexample_w2_sq_closed_form(double t) {
    const double d1 = (1.0 - t) * (1.0 - t);
    const double d2 = (1.0 + t) * (1.0 + t);
    return 4.0 + std::min(d1, d2);
}

}  // namespace xsdist
