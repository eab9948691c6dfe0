#pragma once

namespace xsdist {

/// Euler gamma function for x > 0, relative error <= 1e-12.
/// Throws std::domain_error for x <= 0 or non-finite x.
double gamma_fn(double x);

/// log(Gamma(x)) for x > 0; used internally for large arguments.
double log_gamma_fn(double x);

/// Gamma(b + 1/2) / Gamma(b), overflow-safe for large b.
double gamma_half_ratio(double b);

/// Standard normal CDF / PDF, absolute error <= 1e-14.
double normal_cdf(double x);
double normal_pdf(double x);

/// Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0.
/// Relative error <= 1e-9 over nu in [0,10], x in (0,50]. Throws
/// std::domain_error for x <= 0 or nu < 0, std::overflow_error when the
/// result exceeds the double range (small x, large nu).
double bessel_k(double nu, double x);

/// e^x K_nu(x); stays representable for large x.
double bessel_k_scaled(double nu, double x);

namespace detail {
/// 1/Gamma(1+mu) for |mu| <= 0.5, by Taylor series.
double reciprocal_gamma_1p(double mu);
/// Temme's auxiliary functions:
///   g1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)] / (2 mu)   (limit -psi-free form at 0)
///   g2 = [1/Gamma(1-mu) + 1/Gamma(1+mu)] / 2
void temme_gamma(double mu, double& g1, double& g2, double& one_over_gamma_1p,
                 double& one_over_gamma_1m);
}  // namespace detail

}  // namespace xsdist
