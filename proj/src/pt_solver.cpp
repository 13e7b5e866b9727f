#include "isingloop/pt_solver.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace isingloop {

namespace {

constexpr double kPi = std::numbers::pi;

TaggedPoly fourier_mono(int ep, int eq, const mpq_class& c) {
    TagMonomial m;
    m[TagMonomial::P] = ep;
    m[TagMonomial::Q] = eq;
    return TaggedPoly(m, CycloNum(c));
}

// 2 * cos-sum in symbol form: e^p + e^-p + e^q + e^-q + e^(p-q) + e^-(p-q)
TaggedPoly two_cos_sum() {
    TaggedPoly s;
    for (auto [a, b] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}) s += fourier_mono(a, b, 1);
    return s;
}

}  // namespace

double PsiPolynomial::theta(double x, double w1, double w2, double w3) const {
    double acc = 0, xk = 1;
    for (int k = 0; k <= psi.order(); ++k) {
        acc += xk * eval_fourier(psi[k], w1, w2, w3).real();
        xk *= x;
    }
    return acc;
}

PsiPolynomial symbolic_psi_pt(WalkMode layout) {
    PropagatorMatrix f = fourier_matrix(build_pt_propagator(layout));
    std::array<std::array<XSeries, 6>, 6> m;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            XSeries e(6);
            if (i == j) e[0] = TaggedPoly(1);
            e[1] = -f.omega(i, j);
            m[i][j] = e;
        }
    XSeries zero(6), one(6);
    one[0] = TaggedPoly(1);
    auto at = [&](int i, int j) -> const XSeries& { return m[i][j]; };
    return {layout, laplace_det<XSeries>(at, 6, zero, one)};
}

PsiPolynomial printed_psi_pt() {
    PsiPolynomial p;
    p.layout = WalkMode::Printed;
    TaggedPoly c = two_cos_sum();  // = 2 * (cos + cos + cos)
    p.psi[0] = TaggedPoly(1);
    p.psi[1] = -c;
    p.psi[2] = TaggedPoly(3);
    // 8 cos(4 pi (p-q)/L) + 4 (cos + cos + cos)
    p.psi[3] = fourier_mono(2, -2, 4) + fourier_mono(-2, 2, 4) + c * TaggedPoly(2);
    p.psi[4] = TaggedPoly(3);
    p.psi[5] = -c;
    p.psi[6] = TaggedPoly(1);
    return p;
}

namespace {

// f(x) in factored form and the angular part as a sum of squared sines, free of cancellation near the origin
double f_factored(double x) {
    double g = (x * x - 4 * x + 1) * (x + 1);
    return g * g;
}

double sin2(double a) {
    double s = std::sin(0.5 * a);
    return s * s;
}

}  // namespace

// 1 - 2xC + 3x^2 + x^3 (8 cos 2(w1-w2) + 4C) + 3x^4 - 2x^5 C + x^6
double theta_pt(double x, double w1, double w2) {
    double S = sin2(w1) + sin2(w2) + sin2(w1 - w2), b = 1 - x * x;
    return f_factored(x) + 4 * x * b * b * S - 16 * x * x * x * sin2(2 * (w1 - w2));
}

double theta_pt_planar(double x, double w1, double w2) {
    double S = sin2(w1) + sin2(w2) + sin2(w1 - w2), b = 1 - x * x;
    return f_factored(x) + 4 * x * b * b * S;
}

double f_poly_eval(double x) { return f_poly_derivative(x, 0); }

double f_poly_derivative(double x, int order) {
    std::array<double, 7> c = {1, -6, 3, 20, 3, -6, 1};
    for (int d = 0; d < order; ++d) {
        for (int k = 0; k + 1 < 7; ++k) c[k] = c[k + 1] * (k + 1);
        c[6] = 0;
    }
    double acc = 0;
    for (int k = 6; k >= 0; --k) acc = acc * x + c[k];
    return acc;
}

CriticalFit critical_point() {
    // f has a double root at x_c: bisect the sign change of f', then Newton on f'.
    double lo = 0.2, hi = 0.3;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f_poly_derivative(mid, 1) < 0) lo = mid;
        else hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        double step = f_poly_derivative(x, 1) / f_poly_derivative(x, 2);
        x -= step;
        if (std::abs(step) < 1e-16) break;
    }
    CriticalFit fit;
    fit.x_c = x;
    fit.Tc_over_J = 1 / std::atanh(x);
    fit.f_at_xc = f_poly_eval(x);
    fit.fprime_at_xc = f_poly_derivative(x, 1);
    fit.fsecond_at_xc = f_poly_derivative(x, 2);
    return fit;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        weights[i] = 2 * v * v;
    }
}

namespace {

struct Rule1D {
    std::vector<double> t, w;
};

const Rule1D& gl_rule(int n) {
    static std::map<int, Rule1D> cache;
    static std::mutex mu;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) {
        Rule1D r;
        gauss_legendre(n, r.t, r.w);
        it = cache.emplace(n, std::move(r)).first;
    }
    return it->second;
}

// Composite rule on [a,b] split at the given edges.
Rule1D composite(const std::vector<double>& edges, int n) {
    const Rule1D& g = gl_rule(n);
    Rule1D r;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        double a = edges[k], b = edges[k + 1], h = 0.5 * (b - a), c = 0.5 * (a + b);
        for (int i = 0; i < n; ++i) {
            r.t.push_back(c + h * g.t[i]);
            r.w.push_back(h * g.w[i]);
        }
    }
    return r;
}

double graded_mean_log_theta(double x, int n, const QuadratureOptions& opt) {
    std::vector<double> s_edges = {0.0};
    for (double e = opt.innermost; e < 1; e *= 2) s_edges.push_back(e);
    s_edges.push_back(1.0);
    std::vector<double> t_edges;
    for (int k = 0; k <= opt.angular_panels; ++k) t_edges.push_back(-1 + 2.0 * k / opt.angular_panels);
    Rule1D S = composite(s_edges, n), T = composite(t_edges, n);
    auto theta = opt.integrand == WalkMode::Printed ? theta_pt : theta_pt_planar;
    // four triangles with apex at the origin: point = pi * s * (u + t v)
    const int tri[4][4] = {{1, 0, 0, 1}, {-1, 0, 0, 1}, {0, 1, 1, 0}, {0, -1, 1, 0}};
    double acc = 0;
    for (const auto& tr : tri)
        for (std::size_t i = 0; i < S.t.size(); ++i) {
            double s = S.t[i], part = 0;
            for (std::size_t j = 0; j < T.t.size(); ++j) {
                double t = T.t[j];
                double w1 = kPi * s * (tr[0] + t * tr[2]);
                double w2 = kPi * s * (tr[1] + t * tr[3]);
                part += T.w[j] * std::log(theta(x, w1, w2));
            }
            acc += S.w[i] * kPi * kPi * s * part;
        }
    return acc / (4 * kPi * kPi);
}

double trapezoid_mean_log_theta(double x, int n, const QuadratureOptions& opt) {
    auto theta = opt.integrand == WalkMode::Printed ? theta_pt : theta_pt_planar;
    double acc = 0, h = 2 * kPi / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += std::log(theta(x, (i + 0.5) * h, (j + 0.5) * h));
    return acc / (double(n) * n);
}

}  // namespace

QuadratureValue mean_log_theta(double x, const QuadratureOptions& opt) {
    if (x == 0) return {0, 0};
    if (opt.kind == QuadratureKind::Trapezoid) {
        double fine = trapezoid_mean_log_theta(x, opt.trapezoid_n, opt);
        double coarse = trapezoid_mean_log_theta(x, opt.trapezoid_n / 2, opt);
        return {fine, std::abs(fine - coarse)};
    }
    double fine = graded_mean_log_theta(x, opt.gauss_nodes, opt);
    double coarse = graded_mean_log_theta(x, std::max(2, opt.gauss_nodes - 8), opt);
    return {fine, std::abs(fine - coarse)};
}

namespace {

ThermoResult assemble(double T, double J, double x, const QuadratureValue& q) {
    ThermoResult r;
    r.T = T;
    r.J = J;
    r.x = x;
    r.phi_over_T = -std::log(2.0) + 1.5 * std::log1p(-x * x) - 0.5 * q.value;
    r.phi = std::isfinite(T) ? T * r.phi_over_T : 0;
    r.error = std::isfinite(T) ? 0.5 * T * q.error : 0.5 * q.error;
    return r;
}

}  // namespace

ThermoResult free_energy(double T, double J, const QuadratureOptions& opt) {
    if (!(T > 0)) throw std::invalid_argument("free_energy: T must be positive");
    double x = std::tanh(J / T);
    return assemble(T, J, x, mean_log_theta(x, opt));
}

ThermoResult free_energy_at_x(double x, double J, const QuadratureOptions& opt) {
    if (x < 0 || x >= 1) throw std::invalid_argument("free_energy_at_x: x must lie in [0,1)");
    double T = x == 0 ? std::numeric_limits<double>::infinity() : J / std::atanh(x);
    return assemble(T, J, x, mean_log_theta(x, opt));
}

ThermoResult free_energy_modes(double T, double J, int L, WalkMode integrand) {
    auto theta = integrand == WalkMode::Printed ? theta_pt : theta_pt_planar;
    double x = std::tanh(J / T), acc = 0;
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q) acc += std::log(theta(x, 2 * kPi * p / L, 2 * kPi * q / L));
    return assemble(T, J, x, {acc / (double(L) * L), 0});
}

double specific_heat(double T, double J, double h, const QuadratureOptions& opt) {
    double fp = free_energy(T + h, J, opt).phi, f0 = free_energy(T, J, opt).phi, fm = free_energy(T - h, J, opt).phi;
    return -T * (fp - 2 * f0 + fm) / (h * h);
}

std::vector<ScanPoint> specific_heat_grid(const ScanOptions& opt) {
    if (!(opt.window_lo > 0 && opt.window_hi > opt.window_lo) || opt.points_per_side < 2)
        throw std::invalid_argument("specific_heat_grid: invalid window");
    if (opt.window_lo < opt.blackout)
        throw GridTooCoarse(opt.blackout, "specific_heat_grid: window enters the blackout around x_c");
    const double xc = critical_point().x_c, Tc = 1 / std::atanh(xc);
    std::vector<ScanPoint> pts;
    for (int side : {-1, 1})
        for (int i = 0; i < opt.points_per_side; ++i) {
            double u = double(i) / (opt.points_per_side - 1);
            double d = opt.window_lo * std::pow(opt.window_hi / opt.window_lo, u);
            ScanPoint p;
            p.side = side;
            p.x = xc + side * d;
            p.T = 1 / std::atanh(p.x);
            double h = opt.fd_fraction * std::abs(p.T - Tc);
            if (h < opt.min_step * p.T)
                throw GridTooCoarse(opt.min_step * p.T / opt.fd_fraction,
                                    "specific_heat_grid: stencil below the stable step; move away from T_c");
            p.cv = specific_heat(p.T, 1, h, opt.quad);
            auto th = free_energy(p.T, 1, opt.quad);
            p.phi = th.phi;
            p.error = th.error;
            pts.push_back(p);
        }
    return pts;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = x[i];
        A(i, 1) = 1;
        b(i) = y[i];
    }
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    Eigen::VectorXd res = b - A * c;
    double mean = b.mean();
    double ss_tot = (b.array() - mean).square().sum();
    return {c(0), c(1), ss_tot > 0 ? 1 - res.squaredNorm() / ss_tot : 1.0};
}

CriticalFit specific_heat_scan(const std::vector<ScanPoint>& points, const ScanOptions& opt) {
    CriticalFit fit = critical_point();
    fit.window_lo = opt.window_lo;
    fit.window_hi = opt.window_hi;
    std::vector<double> lx, cv, lx_b, cv_b, lx_a, cv_a;
    for (const auto& p : points) {
        double d = std::abs(p.x - fit.x_c);
        if (d < opt.blackout || d < opt.window_lo * (1 - 1e-9) || d > opt.window_hi * (1 + 1e-9)) continue;
        lx.push_back(std::log(d));
        cv.push_back(p.cv);
        (p.side < 0 ? lx_b : lx_a).push_back(std::log(d));
        (p.side < 0 ? cv_b : cv_a).push_back(p.cv);
    }
    if (lx_b.size() < 2 || lx_a.size() < 2) throw std::invalid_argument("specific_heat_scan: too few points per side");
    auto all = fit_line(lx, cv), below = fit_line(lx_b, cv_b), above = fit_line(lx_a, cv_a);
    fit.B = all.slope;
    fit.intercept = all.intercept;
    fit.r2 = all.r2;
    fit.B_below = below.slope;
    fit.intercept_below = below.intercept;
    fit.r2_below = below.r2;
    fit.B_above = above.slope;
    fit.intercept_above = above.intercept;
    fit.r2_above = above.r2;
    return fit;
}

}  // namespace isingloop
