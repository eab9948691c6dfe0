#pragma once

#include <vector>

namespace xsdist {

enum class QuadKind { GaussHermite, GaussLaguerre, GaussLegendre };

/// Gaussian quadrature rule: weights are positive, Hermite/Legendre nodes
/// symmetric about 0 within 1e-10.
struct QuadratureRule {
    QuadKind kind;
    std::vector<double> nodes;
    std::vector<double> weights;

    int order() const { return static_cast<int>(nodes.size()); }
};

/// Builds a rule of the given order (1..512). Weight functions:
///   GaussHermite:  exp(-x^2) on (-inf, inf)
///   GaussLaguerre: exp(-x)   on (0, inf)
///   GaussLegendre: 1         on (-1, 1)
/// In debug builds the rule is verified against exact monomial moments.
QuadratureRule make_quadrature(QuadKind kind, int order);

/// Generalized Gauss-Laguerre with weight x^alpha exp(-x), alpha > -1.
QuadratureRule gauss_laguerre_generalized(int order, double alpha);

/// Worst relative deviation of rule-integrated monomials x^d, d <= max_degree,
/// from the exact moments of the rule's weight function. Degrees whose exact
/// moment is zero are compared absolutely against the scale of the moments;
/// degrees whose moment overflows double are skipped.
double max_monomial_error(const QuadratureRule& rule, int max_degree);

}  // namespace xsdist
