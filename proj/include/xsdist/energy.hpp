#pragma once

#include <limits>
#include <memory>
#include <string>

#include "xsdist/point_cloud.hpp"

namespace xsdist {

/// Radial profile g with g(||x-y||) = squared distance between two Diracs.
class RadialKernel {
public:
    virtual ~RadialKernel() = default;
    virtual double operator()(double r) const = 0;
    virtual double max_radius() const { return std::numeric_limits<double>::infinity(); }
    virtual std::string name() const = 0;
};

/// The canonical energy kernel g(r) = r.
class EnergyKernel final : public RadialKernel {
public:
    double operator()(double r) const override;
    std::string name() const override { return "energy"; }
};

/// g(r) = r for r >= 0; throws std::domain_error on negative input.
double energy_kernel(double r);

/// Decomposed squared distance between two empirical measures:
/// total = cross_term - self_term_a - self_term_b.
struct EnergyLossReport {
    double cross_term = 0.0;
    double self_term_a = 0.0;
    double self_term_b = 0.0;
    double total = 0.0;
};

/// Squared energy distance between uniform clouds: cross term normalized by
/// 1/(K*J), self terms by 1/(2K^2) and 1/(2J^2). Symmetric, >= -1e-12.
EnergyLossReport xs_energy_distance_sq(const PointCloud& a, const PointCloud& b);

/// Same decomposition with an arbitrary radial kernel g(||.||).
EnergyLossReport generic_xs_distance_sq(const RadialKernel& g, const PointCloud& a,
                                        const PointCloud& b);

/// Weighted generalization: weights must each sum to 1.
EnergyLossReport xs_distance_sq_weighted(const RadialKernel& g, const PointCloud& a,
                                         std::span<const double> wa, const PointCloud& b,
                                         std::span<const double> wb);

enum class XiMethod { Series, PoissonExact, QuadraticSurrogate, Coarse, Iterated };

/// Evaluator for xi(a) = squared distance from a Dirac at radius a to N(0,I),
/// with the second-order surrogate constants cached:
///   c_n1 = 1/xi''(0)^2,  c_n0 = xi(0) - 1/xi''(0),  so c_n0 + sqrt(c_n1) = xi(0).
struct XiEvaluator {
    int n_dim = 1;
    XiMethod method = XiMethod::PoissonExact;
    double tolerance = 1e-14;
    int max_terms = 400;
    double c_n0 = 0.0;
    double c_n1 = 0.0;
    double xi0 = 0.0;          // xi(0) = (sqrt(2)-1) Gamma((N+1)/2)/Gamma(N/2)
    double normal_self = 0.0;  // (1/2) E||Z-Z'|| = Gamma((N+1)/2)/Gamma(N/2)
    double ddxi0 = 0.0;        // xi''(0)

    static XiEvaluator make(int n_dim, XiMethod method = XiMethod::PoissonExact,
                            double tolerance = 1e-14, int max_terms = 400);

    /// Dispatches on method; Series falls back to the Poisson form when
    /// a^2 > N (alternating-series cancellation region).
    double xi(double a) const;
};

/// xi''(0) = sqrt(2/pi) Gamma((N+1)/2) Gamma(3/2) / Gamma(1+N/2).
double xi_second_derivative_zero(int n_dim);

/// Alternating power series for xi(a); throws NonConvergence when max_terms
/// is hit with the last term still above tolerance (expected for large a).
double xi_series(double a, const XiEvaluator& ev);

/// E||x-Z|| as a Poisson(a^2/2) mixture of gamma ratios; always converges.
double dirac_normal_mean(double a, int n_dim, double tolerance = 1e-14);

/// xi(a) via the Poisson mixture minus the normal self term.
double xi_poisson_exact(double a, int n_dim, double tolerance = 1e-14);

/// c_n0 + sqrt(a^2 + c_n1); error vs the exact xi is O(a^4) near 0.
double xi_quadratic_surrogate(double a, const XiEvaluator& ev);

/// sqrt(a^2+N) - c1 with c1 fixed by xi_coarse(0) = xi(0).
double xi_coarse(double a, int n_dim);

/// Second-order delta-method expansion of E sqrt(noncentral chi^2).
double xi_iterated(double a, int n_dim);

/// d xi / d a = a (g^{N+2}(a) - g^N(a)); returns 0 at a = 0 (even function).
double xi_gradient(double a, int n_dim);

/// Batch latent loss, surrogate form:
///   c_n0 + (1/K) sum sqrt(||z_k||^2 + c_n1) - (1/(2K^2)) sum ||z_k - z_k'||.
/// Report fields: cross_term carries the first two summands, self_term_a the
/// pairwise term, self_term_b = 0. The value may be slightly negative: the
/// surrogate absorbs the normal self term into c_n0 and is only second-order
/// exact.
EnergyLossReport latent_loss(const PointCloud& codes, const XiEvaluator& ev);

/// Analytic gradient of latent_loss w.r.t. the codes; subgradient 0 at
/// coincident pairs. Returns a K x N matrix.
PointCloud latent_loss_gradient(const PointCloud& codes, const XiEvaluator& ev);

/// Full decomposed squared distance from a cloud to N(0,I) under the chosen
/// xi method: cross = (1/K) sum E||z_k - Z||, self_a = pairwise term,
/// self_b = normal self term. For the surrogate/coarse/iterated methods the
/// constants are folded as in latent_loss.
EnergyLossReport xs_normal_distance_sq(const PointCloud& codes, const XiEvaluator& ev);

}  // namespace xsdist
