#include "xsdist/sobolev_hs.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "xsdist/csv_io.hpp"
#include "xsdist/errors.hpp"
#include "xsdist/parallel.hpp"
#include "xsdist/quadrature.hpp"
#include "xsdist/special_functions.hpp"

namespace xsdist {

HsParams::HsParams(double s_, int n_dim_) : s(s_), n_dim(n_dim_) {
    if (!(s > 0.5))
        throw std::domain_error("HsParams: s must be > 1/2 for Diracs to lie in the dual");
    if (n_dim < 1) throw std::domain_error("HsParams: n_dim must be >= 1");
}

double hs_limit_constant(double s) {
    if (!(s > 0.5)) throw std::domain_error("hs_limit_constant: s must be > 1/2");
    return 2.0 * std::sqrt(std::numbers::pi) * gamma_fn(s - 0.5) / gamma_fn(s);
}

double hs_dual_norm_sq_1d(double r, double s) {
    if (!(s > 0.5)) throw std::domain_error("hs_dual_norm_sq_1d: s must be > 1/2");
    if (r < 0.0) throw std::domain_error("hs_dual_norm_sq_1d: r must be >= 0");
    if (r == 0.0) return 0.0;
    const double nu = s - 0.5;
    return hs_limit_constant(s) -
           4.0 * std::sqrt(std::numbers::pi) / gamma_fn(s) * std::pow(0.5 * r, nu) *
               bessel_k(nu, r);
}

namespace {

const QuadratureRule& cached_legendre(int order) {
    static std::mutex mu;
    static std::unordered_map<int, QuadratureRule> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, make_quadrature(QuadKind::GaussLegendre, order)).first;
    return it->second;
}

// f^{(order)}(xi) for f(xi) = p0(xi) * (1+xi^2)^{-s}, via the recurrence
// p_{k+1} = (1+xi^2) p_k' - 2(s+k) xi p_k on polynomial coefficients.
double weight_derivative(std::vector<double> p, double s, int order, double xi) {
    for (int k = 0; k < order; ++k) {
        std::vector<double> next(p.size() + 1, 0.0);
        for (std::size_t i = 1; i < p.size(); ++i) {
            next[i - 1] += static_cast<double>(i) * p[i];
            next[i + 1] += static_cast<double>(i) * p[i];
        }
        for (std::size_t i = 0; i < p.size(); ++i) next[i + 1] -= 2.0 * (s + k) * p[i];
        p = std::move(next);
    }
    double val = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) val = val * xi + p[i];
    return val * std::pow(1.0 + xi * xi, -(s + order));
}

// integral of (1+xi^2)^{-s} over [Xi, inf), binomial tail series (Xi >= 2).
double weight_tail(double s, double big_xi) {
    double binom = 1.0;
    double pow_term = std::pow(big_xi, 1.0 - 2.0 * s);
    double sum = 0.0;
    for (int k = 0; k < 60; ++k) {
        const double t = binom * pow_term / (2.0 * s - 1.0 + 2.0 * k);
        sum += t;
        if (std::fabs(t) < 1e-18 * std::fabs(sum)) break;
        binom *= (-s - k) / (k + 1.0);
        pow_term /= big_xi * big_xi;
    }
    return sum;
}

// Gauss-Legendre over the arctan-compactified panel [xi_lo, xi_hi].
template <class F>
double panel_integral(double xi_lo, double xi_hi, int n_xi, const F& f) {
    const QuadratureRule& rule = cached_legendre(n_xi);
    const double u_lo = std::atan(xi_lo);
    const double u_hi = std::atan(xi_hi);
    const double mid = 0.5 * (u_lo + u_hi);
    const double half = 0.5 * (u_hi - u_lo);
    double sum = 0.0;
    for (int i = 0; i < rule.order(); ++i) {
        const double u = mid + half * rule.nodes[i];
        const double xi = std::tan(u);
        sum += rule.weights[i] * f(xi) * (1.0 + xi * xi);
    }
    return sum * half;
}

template <class F>
double panel_sweep(double lo_phase_idx, double hi_phase_idx, double c, int n_xi, const F& f) {
    // Panels between phase points j*pi/c, refined geometrically where panels
    // span more than a factor of two in xi.
    double total = 0.0;
    const double pi = std::numbers::pi;
    for (double j = lo_phase_idx; j < hi_phase_idx; ++j) {
        const double xi_a = j * pi / c;
        const double xi_b = (j + 1.0) * pi / c;
        double lo = xi_a;
        if (xi_a < 1e-300) {
            // leading panel: geometric refinement from xi_b downwards
            std::vector<double> cuts;
            double x = xi_b;
            while (x > 0.5) {
                x *= 0.5;
                cuts.push_back(x);
            }
            std::sort(cuts.begin(), cuts.end());
            double prev = 0.0;
            for (double cut : cuts) {
                total += panel_integral(prev, cut, n_xi, f);
                prev = cut;
            }
            total += panel_integral(prev, xi_b, n_xi, f);
            continue;
        }
        total += panel_integral(lo, xi_b, n_xi, f);
    }
    return total;
}

// Shared adaptive scheme for the two spectral integrals. `sine` selects the
// cosine (even) or sine (odd) integrand.
double osc_integral(double c, double s, int n_xi, bool sine) {
    if (c == 0.0) return 0.0;
    const double pi = std::numbers::pi;

    auto f_cos = [&](double xi) {
        const double half_sin = std::sin(0.5 * c * xi);
        return 8.0 * half_sin * half_sin * std::exp(-s * std::log1p(xi * xi));
    };
    auto f_sin = [&](double xi) {
        return 4.0 * xi * std::sin(c * xi) * std::exp(-s * std::log1p(xi * xi));
    };

    long m = std::max<long>(8, static_cast<long>(std::ceil(c * 16.0 / pi)));
    double panels = sine ? panel_sweep(0.0, static_cast<double>(m), c, n_xi, f_sin)
                         : panel_sweep(0.0, static_cast<double>(m), c, n_xi, f_cos);

    for (int round = 0; round < 30; ++round) {
        const double big_xi = static_cast<double>(m) * pi / c;
        const double sigma = (m % 2 == 0) ? 1.0 : -1.0;
        double tail, err;
        if (!sine) {
            // tail = 4 W(Xi) - 4 int_Xi^inf cos(c xi) w dxi,
            // int cos.w = sigma(-w'/c^2 + w'''/c^4 - ...) at a phase multiple of pi
            const double w1 = weight_derivative({1.0}, s, 1, big_xi);
            const double w3 = weight_derivative({1.0}, s, 3, big_xi);
            const double w5 = weight_derivative({1.0}, s, 5, big_xi);
            const double c2 = c * c;
            const double cos_tail = sigma * (-w1 / c2 + w3 / (c2 * c2));
            tail = 4.0 * weight_tail(s, big_xi) - 4.0 * cos_tail;
            err = 4.0 * std::fabs(w5) / (c2 * c2 * c2);
        } else {
            // tail = 4 int_Xi^inf sin(c xi) psi dxi, psi = xi w,
            // int sin.psi = sigma(psi/c - psi''/c^3 + psi''''/c^5 - ...)
            const double p0 = weight_derivative({0.0, 1.0}, s, 0, big_xi);
            const double p2 = weight_derivative({0.0, 1.0}, s, 2, big_xi);
            const double p4 = weight_derivative({0.0, 1.0}, s, 4, big_xi);
            const double c2 = c * c;
            tail = 4.0 * sigma * (p0 / c - p2 / (c2 * c) + p4 / (c2 * c2 * c));
            err = 4.0 * std::fabs(weight_derivative({0.0, 1.0}, s, 6, big_xi)) /
                  (c2 * c2 * c2 * c);
        }
        const double value = panels + tail;
        if (err <= 1e-11 * std::max(std::fabs(value), 1e-250)) return value;
        if (m >= 200000) return value;  // cost cap; caller's doubling check is the backstop
        // extend the panel region to 2 Xi
        const long m2 = 2 * m;
        panels += sine ? panel_sweep(static_cast<double>(m), static_cast<double>(m2), c, n_xi,
                                     f_sin)
                       : panel_sweep(static_cast<double>(m), static_cast<double>(m2), c, n_xi,
                                     f_cos);
        m = m2;
    }
    // Analytic tail estimate never met the target; the caller's doubling
    // check is the backstop.
    return panels;
}

struct ProductRule {
    std::vector<double> z_nodes, z_weights;  // folded normal nodes (z >= 0)
    std::vector<double> y_nodes, y_weights;  // chi-square_{N-1} radial nodes
};

ProductRule product_rule(const HsParams& params, const QuadOrders& orders) {
    ProductRule pr;
    const QuadratureRule hermite = make_quadrature(QuadKind::GaussHermite, orders.n_z);
    double z_norm = 0.0;
    for (double w : hermite.weights) z_norm += w;
    for (int i = 0; i < hermite.order(); ++i) {
        const double h = hermite.nodes[i];
        if (h < 0.0) continue;
        const double fold = (h == 0.0) ? 1.0 : 2.0;
        pr.z_nodes.push_back(std::numbers::sqrt2 * h);
        pr.z_weights.push_back(fold * hermite.weights[i] / z_norm);
    }
    const double alpha = (params.n_dim - 3.0) / 2.0;
    const QuadratureRule laguerre = gauss_laguerre_generalized(orders.n_y, alpha);
    double y_norm = 0.0;
    for (double w : laguerre.weights) y_norm += w;
    for (int i = 0; i < laguerre.order(); ++i) {
        pr.y_nodes.push_back(2.0 * laguerre.nodes[i]);
        pr.y_weights.push_back(laguerre.weights[i] / y_norm);
    }
    return pr;
}

// E_{z,y}[ f(z / sqrt(z^2+y)) ] over z ~ N(0,1) folded, y ~ chi2_{N-1}.
template <class F>
double sphere_component_average(const HsParams& params, const QuadOrders& orders, const F& f) {
    const ProductRule pr = product_rule(params, orders);
    const std::size_t nz = pr.z_nodes.size();
    const std::size_t ny = pr.y_nodes.size();
    return block_sum(nz * ny, [&](std::size_t idx) {
        const std::size_t i = idx / ny;
        const std::size_t j = idx % ny;
        const double z = pr.z_nodes[i];
        const double y = pr.y_nodes[j];
        const double denom = std::sqrt(z * z + y);
        const double u = denom > 0.0 ? z / denom : 1.0;
        return pr.z_weights[i] * pr.y_weights[j] * f(u);
    }, 4);
}

double hs_kernel_eval(double a, const HsParams& params, const QuadOrders& orders) {
    a = std::fabs(a);
    if (a == 0.0) return 0.0;
    if (params.n_dim == 1) return detail::osc_cos_integral(a, params.s, orders.n_xi);
    return sphere_component_average(params, orders, [&](double u) {
        return detail::osc_cos_integral(a * u, params.s, orders.n_xi);
    });
}

}  // namespace

namespace detail {
double osc_cos_integral(double c, double s, int n_xi) { return osc_integral(c, s, n_xi, false); }
double osc_sin_integral(double c, double s, int n_xi) { return osc_integral(c, s, n_xi, true); }
}  // namespace detail

double hs_kernel_quadrature(double a, const HsParams& params, const QuadOrders& orders,
                            bool check_convergence) {
    if (!(params.s > 0.5)) throw std::domain_error("hs_kernel_quadrature: s must be > 1/2");
    const double coarse = hs_kernel_eval(a, params, orders);
    if (!check_convergence) return coarse;
    const QuadOrders doubled{2 * orders.n_y, 2 * orders.n_z, 2 * orders.n_xi};
    const double fine = hs_kernel_eval(a, params, doubled);
    const double scale = std::max({std::fabs(fine), std::fabs(coarse), 1e-300});
    if (std::fabs(fine - coarse) > 1e-6 * scale)
        throw NonConvergence("hs_kernel_quadrature: doubling the orders moved the value by " +
                             std::to_string(std::fabs(fine - coarse) / scale) +
                             " relative at a=" + std::to_string(a));
    return fine;
}

double hs_kernel_derivative(double a, const HsParams& params, const QuadOrders& orders) {
    if (!(params.s > 0.5)) throw std::domain_error("hs_kernel_derivative: s must be > 1/2");
    if (a == 0.0) return 0.0;  // odd function
    const double sign = a < 0.0 ? -1.0 : 1.0;
    a = std::fabs(a);
    double value;
    if (params.n_dim == 1) {
        value = detail::osc_sin_integral(a, params.s, orders.n_xi);
    } else {
        value = sphere_component_average(params, orders, [&](double u) {
            return u * detail::osc_sin_integral(a * u, params.s, orders.n_xi);
        });
    }
    return sign * value;
}

double hs_kernel_second_derivative_zero(const HsParams& params) {
    if (!(params.s > 1.5))
        throw std::domain_error("hs_kernel_second_derivative_zero: requires s > 3/2");
    return 2.0 * std::sqrt(std::numbers::pi) * gamma_fn(params.s - 1.5) /
           (params.n_dim * gamma_fn(params.s));
}

std::vector<double> sample_V(const HsParams& params, std::size_t count, Seed seed) {
    if (params.n_dim < 2) throw std::invalid_argument("sample_V: requires N >= 2");
    if (!(params.s > 0.5)) throw std::domain_error("sample_V: s must be > 1/2");
    const Philox gen(seed);
    const double dof_t = 2.0 * params.s - 1.0;
    std::vector<double> out(count);
    block_sum(count, [&](std::size_t i) {
        SampleCursor cur(gen, i);
        const double x1 = cur.normal();
        const double y = cur.chi_square(params.n_dim - 1);
        const double t = cur.student_t(dof_t);
        out[i] = x1 * t / std::sqrt(dof_t * (x1 * x1 + y));
        return 0.0;
    }, 512);
    return out;
}

double hs_kernel_charfn(double a, const HsParams& params, std::size_t count, Seed seed) {
    const std::vector<double> v = sample_V(params, count, seed);
    const double mean_cos = block_sum(count, [&](std::size_t i) {
        return std::cos(a * v[i]);
    }, 4096) / static_cast<double>(count);
    return hs_limit_constant(params.s) * (1.0 - mean_cos);
}

namespace {

// Fritsch-Carlson monotone tangents on a uniform grid.
std::vector<double> monotone_tangents(const std::vector<double>& grid,
                                      const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<double> secant(n - 1), tangent(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        secant[i] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
    tangent[0] = secant[0];
    tangent[n - 1] = secant[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        tangent[i] = (secant[i - 1] * secant[i] <= 0.0) ? 0.0
                                                        : 0.5 * (secant[i - 1] + secant[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (secant[i] == 0.0) {
            tangent[i] = tangent[i + 1] = 0.0;
            continue;
        }
        const double alpha = tangent[i] / secant[i];
        const double beta = tangent[i + 1] / secant[i];
        const double r2 = alpha * alpha + beta * beta;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            tangent[i] = tau * alpha * secant[i];
            tangent[i + 1] = tau * beta * secant[i];
        }
    }
    return tangent;
}

// Pool-adjacent-violators projection onto nondecreasing sequences.
void isotonic_project(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> level(n), weight(n);
    std::vector<std::size_t> span(n);
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < n; ++i) {
        level[blocks] = v[i];
        weight[blocks] = 1.0;
        span[blocks] = 1;
        ++blocks;
        while (blocks > 1 && level[blocks - 2] > level[blocks - 1]) {
            const double w = weight[blocks - 2] + weight[blocks - 1];
            level[blocks - 2] =
                (level[blocks - 2] * weight[blocks - 2] + level[blocks - 1] * weight[blocks - 1]) /
                w;
            weight[blocks - 2] = w;
            span[blocks - 2] += span[blocks - 1];
            --blocks;
        }
    }
    std::size_t pos = 0;
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t k = 0; k < span[b]; ++k) v[pos++] = level[b];
}

}  // namespace

void KernelTable::finalize() {
    bound_ = hs_limit_constant(params_.s);
    if (values_.front() != 0.0)
        throw std::logic_error("KernelTable: g(0) must be 0");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > bound_ + 1e-9)
            throw std::logic_error("KernelTable: value exceeds the saturation bound");
        values_[i] = std::min(values_[i], bound_);
        if (i > 0 && values_[i] < values_[i - 1]) {
            if (values_[i - 1] - values_[i] > 1e-8 * bound_)
                throw std::logic_error("KernelTable: values are not nondecreasing");
            values_[i] = values_[i - 1];
        }
    }
    slopes_ = monotone_tangents(grid_, values_);
}

double KernelTable::operator()(double r) const {
    if (r < 0.0 || !std::isfinite(r))
        throw std::domain_error("KernelTable: radius must be finite and >= 0");
    if (r > a_max_)
        throw std::domain_error("KernelTable: radius " + std::to_string(r) +
                                " beyond table range " + std::to_string(a_max_));
    const std::size_t n = grid_.size();
    if (r >= grid_[n - 1]) return values_[n - 1];
    const double h = grid_[1] - grid_[0];
    std::size_t i = std::min(static_cast<std::size_t>(r / h), n - 2);
    if (r < grid_[i]) --i;
    if (r > grid_[i + 1]) ++i;
    const double t = (r - grid_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    const double val = h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] +
                       h11 * h * slopes_[i + 1];
    return std::clamp(val, 0.0, bound_);
}

std::string KernelTable::name() const {
    std::ostringstream os;
    os << "hs:" << params_.s << " (dim " << params_.n_dim << ", "
       << (method_ == TableMethod::Quadrature ? "quadrature" : "charfn") << " table)";
    return os.str();
}

void KernelTable::write_csv(std::ostream& out) const {
    out << "#meta kind=hs s=" << format17(params_.s) << " dim=" << params_.n_dim
        << " amax=" << format17(a_max_) << " grid=" << grid_.size();
    if (method_ == TableMethod::Quadrature) {
        out << " method=quad ny=" << orders_.n_y << " nz=" << orders_.n_z
            << " nxi=" << orders_.n_xi;
    } else {
        out << " method=charfn samples=" << mc_count_ << " seed=" << mc_seed_.value
            << " stream=" << mc_seed_.stream_id;
    }
    out << "\n";
    out << "a,g\n";
    for (std::size_t i = 0; i < grid_.size(); ++i)
        out << format17(grid_[i]) << ',' << format17(values_[i]) << "\n";
}

KernelTable KernelTable::read_csv(std::istream& in) {
    std::string line;
    KernelTable table;
    bool have_meta = false;
    double s = 0.0;
    int dim = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("#meta", 0) == 0) {
            std::istringstream ls(line.substr(5));
            std::string tok;
            while (ls >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const std::string val = tok.substr(eq + 1);
                if (key == "s") s = std::stod(val);
                else if (key == "dim") dim = std::stoi(val);
                else if (key == "method")
                    table.method_ = (val == "charfn") ? TableMethod::CharFn
                                                      : TableMethod::Quadrature;
                else if (key == "ny") table.orders_.n_y = std::stoi(val);
                else if (key == "nz") table.orders_.n_z = std::stoi(val);
                else if (key == "nxi") table.orders_.n_xi = std::stoi(val);
                else if (key == "samples") table.mc_count_ = std::stoul(val);
                else if (key == "seed") table.mc_seed_.value = std::stoull(val);
                else if (key == "stream") table.mc_seed_.stream_id = std::stoull(val);
            }
            have_meta = true;
            continue;
        }
        if (line[0] == '#' || line.rfind("a,g", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError("KernelTable: malformed row: " + line);
        table.grid_.push_back(std::stod(line.substr(0, comma)));
        table.values_.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!have_meta || table.grid_.size() < 2)
        throw IoError("KernelTable: missing meta line or too few rows");
    table.params_ = HsParams(s, dim);
    table.a_max_ = table.grid_.back();
    table.finalize();
    return table;
}

KernelTable build_kernel_table(const HsParams& params, double a_max, int n_grid,
                               TableMethod method, const QuadOrders& orders,
                               std::size_t mc_count, Seed seed) {
    if (n_grid < 16) throw std::invalid_argument("build_kernel_table: n_grid must be >= 16");
    if (!(a_max > 0.0)) throw std::invalid_argument("build_kernel_table: a_max must be > 0");
    KernelTable table;
    table.params_ = params;
    table.method_ = method;
    table.a_max_ = a_max;
    table.orders_ = orders;
    table.mc_count_ = mc_count;
    table.mc_seed_ = seed;
    table.grid_.resize(n_grid);
    table.values_.assign(n_grid, 0.0);
    const double h = a_max / (n_grid - 1);
    for (int i = 0; i < n_grid; ++i) table.grid_[i] = i * h;

    if (method == TableMethod::Quadrature) {
        block_sum(static_cast<std::size_t>(n_grid), [&](std::size_t i) {
            table.values_[i] = hs_kernel_eval(table.grid_[i], params, orders);
            return 0.0;
        }, 1);
    } else {
        // One shared V sample across all radii keeps the curve coherent and
        // the per-radius noise correlated.
        const std::vector<double> v = sample_V(params, mc_count, seed);
        const double c_s = hs_limit_constant(params.s);
        block_sum(static_cast<std::size_t>(n_grid), [&](std::size_t i) {
            if (i == 0) return 0.0;
            const double a = table.grid_[i];
            double mean_cos = 0.0;
            for (const double vi : v) mean_cos += std::cos(a * vi);
            mean_cos /= static_cast<double>(mc_count);
            table.values_[i] = c_s * (1.0 - mean_cos);
            return 0.0;
        }, 1);
        isotonic_project(table.values_);
        if (table.values_.front() < 0.0) table.values_.front() = 0.0;
    }
    table.finalize();

    if (method == TableMethod::Quadrature) {
        // Midpoint refinement: the interpolant must track direct evaluation.
        const int probes = std::min(12, n_grid - 1);
        for (int p = 0; p < probes; ++p) {
            const int cell = static_cast<int>((static_cast<double>(p) + 0.5) /
                                              probes * (n_grid - 1));
            const double mid = table.grid_[cell] + 0.5 * h;
            const double direct = hs_kernel_eval(mid, params, orders);
            const double interp = table(mid);
            if (std::fabs(direct - interp) >
                1e-4 * std::max(std::fabs(direct), 1e-6 * table.bound_))
                throw NonConvergence("build_kernel_table: midpoint validation failed at a=" +
                                     std::to_string(mid));
        }
    }
    return table;
}

}  // namespace xsdist
