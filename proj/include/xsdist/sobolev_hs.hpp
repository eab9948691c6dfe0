#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "xsdist/energy.hpp"
#include "xsdist/rng.hpp"

namespace xsdist {

/// Regularity and ambient dimension of the sliced H^s kernel. Dirac masses
/// sit in the 1-D dual only for s > 1/2.
struct HsParams {
    double s = 1.0;
    int n_dim = 1;

    HsParams() = default;
    HsParams(double s_, int n_dim_);
};

/// Quadrature orders: chi-square radial nodes (n_y), normal nodes (n_z),
/// Gauss-Legendre points per oscillation panel of the spectral integral (n_xi).
struct QuadOrders {
    int n_y = 32;
    int n_z = 32;
    int n_xi = 24;
};

/// Saturation value lim_{a->inf} g(a) = 2 sqrt(pi) Gamma(s-1/2) / Gamma(s).
double hs_limit_constant(double s);

/// 1-D dual-norm squared distance between Diracs at separation r:
///   integral of (2 - 2cos(r xi)) / (1+xi^2)^s over R,
/// in closed form via the Matern identity
///   C_s - (4 sqrt(pi)/Gamma(s)) (r/2)^{s-1/2} K_{s-1/2}(r).
double hs_dual_norm_sq_1d(double r, double s);

/// Sliced kernel g(a) by direct quadrature of the triple integral
/// (chi-square radial x normal x compactified spectral). N = 1 reduces to the
/// pure spectral integral. When `check_convergence` is set the result is
/// recomputed at doubled orders and NonConvergence is thrown if the two
/// disagree by more than 1e-6 relative.
double hs_kernel_quadrature(double a, const HsParams& params, const QuadOrders& orders = {},
                            bool check_convergence = true);

/// d g / d a, odd in a, exactly 0 at a = 0.
double hs_kernel_derivative(double a, const HsParams& params, const QuadOrders& orders = {});

/// g''(0) = 2 sqrt(pi) Gamma(s-3/2) / (N Gamma(s)); requires s > 3/2.
double hs_kernel_second_derivative_zero(const HsParams& params);

/// Samples of V = X1 T / sqrt((2s-1)(X1^2+Y)) with X1 normal, Y chi-square
/// with N-1 dof, T Student-t with 2s-1 dof. Requires N >= 2.
std::vector<double> sample_V(const HsParams& params, std::size_t count, Seed seed);

/// Empirical characteristic-function estimate
///   g(a) ~= C_s (1 - mean cos(a V_i)).
double hs_kernel_charfn(double a, const HsParams& params, std::size_t count, Seed seed);

enum class TableMethod { Quadrature, CharFn };

/// Precomputed grid of g values with monotone cubic interpolation, clamped to
/// [0, C_s]. Usable as a RadialKernel on [0, a_max].
class KernelTable final : public RadialKernel {
public:
    double operator()(double r) const override;
    double max_radius() const override { return a_max_; }
    std::string name() const override;

    const HsParams& params() const { return params_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& table_values() const { return values_; }
    TableMethod method() const { return method_; }
    double upper_bound() const { return bound_; }

    void write_csv(std::ostream& out) const;
    static KernelTable read_csv(std::istream& in);

    friend KernelTable build_kernel_table(const HsParams&, double, int, TableMethod,
                                          const QuadOrders&, std::size_t, Seed);

private:
    KernelTable() = default;
    void finalize();  // slopes + invariant checks

    HsParams params_;
    TableMethod method_ = TableMethod::Quadrature;
    double a_max_ = 0.0;
    double bound_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> slopes_;
    QuadOrders orders_;       // Quadrature provenance
    std::size_t mc_count_ = 0;  // CharFn provenance
    Seed mc_seed_;
};

/// Tabulates g on a uniform n_grid-point grid over [0, a_max]. Quadrature
/// tables are midpoint-validated to 1e-4 relative; CharFn tables are
/// isotonically projected (MC noise) and validated within their error bars.
KernelTable build_kernel_table(const HsParams& params, double a_max, int n_grid,
                               TableMethod method, const QuadOrders& orders = {},
                               std::size_t mc_count = 1000000, Seed seed = {});

namespace detail {
/// Spectral integrals with weight w = (1+xi^2)^{-s}, for c >= 0:
///   osc_cos_integral = integral over R of (2 - 2cos(c xi)) w(xi) dxi
///   osc_sin_integral = integral over R of 2 xi sin(c xi) w(xi) dxi
/// Oscillation-aligned Gauss-Legendre panels on the arctan-compactified axis
/// plus integration-by-parts tails.
double osc_cos_integral(double c, double s, int n_xi);
double osc_sin_integral(double c, double s, int n_xi);
}  // namespace detail

}  // namespace xsdist
