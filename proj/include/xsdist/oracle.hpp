#pragma once

#include <functional>
#include <span>
#include <vector>

#include "xsdist/energy.hpp"
#include "xsdist/point_cloud.hpp"
#include "xsdist/rng.hpp"

namespace xsdist {

/// Monte-Carlo estimate with its standard error (sample sigma / sqrt(n)).
struct OracleEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    Seed seed;
};

/// 1-D dual-norm-squared kernel evaluated at |r| (|r| for the energy case).
using Kernel1D = std::function<double(double)>;

/// Unbiased sphere average of the projected 1-D squared distance,
/// one inner evaluation per sampled direction. For the energy kernel the raw
/// value equals E|theta_1| times the canonical xs_energy_distance_sq.
OracleEstimate mc_sliced_distance_sq(const PointCloud& a, const PointCloud& b,
                                     const Kernel1D& kernel1d, std::size_t n_dirs, Seed seed);

/// MC estimate of E||x - Z||, Z ~ N(0, I).
OracleEstimate mc_dirac_to_normal(std::span<const double> x, std::size_t n_samples, Seed seed);

/// Exact squared 2-Wasserstein between equal-size uniform clouds by
/// enumerating all K! assignments; K = J <= 8.
double exact_w2_sq_small(const PointCloud& a, const PointCloud& b);

/// Residuals of the interpolation identity
///   d^2(nu, mu_t) - [(1-t) d^2(nu, mu0) + t d^2(nu, mu1) - t(1-t) d^2(mu0, mu1)]
/// where mu_t is the weighted union of mu0 (weights (1-t)/K) and mu1 (t/J).
std::vector<double> geodesic_identity_residual(const PointCloud& mu0, const PointCloud& mu1,
                                               const PointCloud& nu,
                                               std::span<const double> t_grid,
                                               const RadialKernel& g = EnergyKernel{});

/// The weighted-mixture squared distance d^2(nu, mu_t) itself.
double mixture_distance_sq(const PointCloud& mu0, const PointCloud& mu1, const PointCloud& nu,
                           double t, const RadialKernel& g = EnergyKernel{});

/// Max abs deviation between grad_f and central finite differences of f.
double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> analytic_grad, std::span<const double> point,
                         double h);

/// The two-Dirac counterexample family: mu_t = {(t,2), (-t,-2)},
/// nu = {(1,0), (-1,0)}; W2^2(nu, mu_t) = 4 + min((1-t)^2, (1+t)^2).
PointCloud counterexample_mu(double t);
PointCloud counterexample_nu();
double counterexample_w2_sq_closed_form(double t);

}  // namespace xsdist
