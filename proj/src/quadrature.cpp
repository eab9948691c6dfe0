#include "xsdist/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "xsdist/special_functions.hpp"

namespace xsdist {

namespace {

// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating the first
// row of the eigenvector matrix (Golub-Welsch). d: diagonal, e: off-diagonal
// (length n, last entry scratch), z: first-row accumulator.
void ql_first_row(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    if (n == 1) return;
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 64)
                    throw std::runtime_error("make_quadrature: eigenvalue iteration stalled");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

struct Recurrence {
    std::vector<double> a;   // diagonal
    std::vector<double> sb;  // sqrt(b_k), k = 1..n-1
    double mu0;              // integral of the weight function
};

Recurrence recurrence_for(QuadKind kind, int n, double alpha = 0.0) {
    Recurrence rec;
    rec.a.resize(n);
    rec.sb.resize(n > 1 ? n - 1 : 0);
    switch (kind) {
        case QuadKind::GaussHermite:
            for (int k = 0; k < n; ++k) rec.a[k] = 0.0;
            for (int k = 1; k < n; ++k) rec.sb[k - 1] = std::sqrt(k / 2.0);
            rec.mu0 = std::sqrt(std::numbers::pi);
            break;
        case QuadKind::GaussLaguerre:
            for (int k = 0; k < n; ++k) rec.a[k] = 2.0 * k + alpha + 1.0;
            for (int k = 1; k < n; ++k) rec.sb[k - 1] = std::sqrt(k * (k + alpha));
            rec.mu0 = gamma_fn(alpha + 1.0);
            break;
        case QuadKind::GaussLegendre:
            for (int k = 0; k < n; ++k) rec.a[k] = 0.0;
            for (int k = 1; k < n; ++k)
                rec.sb[k - 1] = std::sqrt(k * k / (4.0 * k * k - 1.0));
            rec.mu0 = 2.0;
            break;
    }
    return rec;
}

QuadratureRule golub_welsch(QuadKind kind, int order, double alpha) {
    Recurrence rec = recurrence_for(kind, order, alpha);
    std::vector<double> d = rec.a;
    std::vector<double> e(order, 0.0);
    for (int k = 0; k + 1 < order; ++k) e[k] = rec.sb[k];
    std::vector<double> z(order, 0.0);
    z[0] = 1.0;
    ql_first_row(d, e, z);

    std::vector<int> idx(order);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] < d[j]; });

    QuadratureRule rule;
    rule.kind = kind;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = d[idx[i]];
        rule.weights[i] = rec.mu0 * z[idx[i]] * z[idx[i]];
    }

    if (kind == QuadKind::GaussHermite || kind == QuadKind::GaussLegendre) {
        // Enforce the +/- node symmetry exactly.
        for (int i = 0, j = order - 1; i < j; ++i, --j) {
            const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
            rule.nodes[j] = x;
            rule.nodes[i] = -x;
            const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
            rule.weights[i] = rule.weights[j] = w;
        }
        if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    }
    return rule;
}

double exact_moment(QuadKind kind, double alpha, int degree) {
    switch (kind) {
        case QuadKind::GaussHermite:
            return degree % 2 == 1 ? 0.0 : gamma_fn((degree + 1) / 2.0);
        case QuadKind::GaussLaguerre:
            return gamma_fn(degree + alpha + 1.0);
        case QuadKind::GaussLegendre:
            return degree % 2 == 1 ? 0.0 : 2.0 / (degree + 1);
    }
    return 0.0;
}

double moment_scale(QuadKind kind, double alpha, int degree) {
    const int d_even = degree - degree % 2;
    return std::fabs(exact_moment(kind, alpha, d_even));
}

double max_monomial_error_impl(const QuadratureRule& rule, double alpha, int max_degree) {
    double worst = 0.0;
    for (int deg = 0; deg <= max_degree; ++deg) {
        const double scale = moment_scale(rule.kind, alpha, deg);
        if (!std::isfinite(scale)) break;  // moments beyond double range: skip
        double q = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            q += rule.weights[i] * std::pow(rule.nodes[i], deg);
        const double m = exact_moment(rule.kind, alpha, deg);
        worst = std::max(worst, std::fabs(q - m) / scale);
    }
    return worst;
}

}  // namespace

double max_monomial_error(const QuadratureRule& rule, int max_degree) {
    return max_monomial_error_impl(rule, 0.0, max_degree);
}

QuadratureRule make_quadrature(QuadKind kind, int order) {
    if (order < 1 || order > 512)
        throw std::invalid_argument("make_quadrature: order must be in [1, 512]");
    QuadratureRule rule = golub_welsch(kind, order, 0.0);
#ifndef NDEBUG
    // Exactness holds up to degree 2*order-1; degrees whose moments leave the
    // double range cannot be checked and are capped.
    const int max_deg = std::min(2 * order - 1, 63);
    if (max_monomial_error_impl(rule, 0.0, max_deg) > 1e-10)
        throw std::runtime_error("make_quadrature: constructed rule failed moment check");
#endif
    return rule;
}

QuadratureRule gauss_laguerre_generalized(int order, double alpha) {
    if (order < 1 || order > 1024)
        throw std::invalid_argument("gauss_laguerre_generalized: bad order");
    if (!(alpha > -1.0))
        throw std::invalid_argument("gauss_laguerre_generalized: alpha must be > -1");
    return golub_welsch(QuadKind::GaussLaguerre, order, alpha);
}

}  // namespace xsdist
