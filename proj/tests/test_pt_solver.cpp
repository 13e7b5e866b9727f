#include <doctest.h>

#include <cmath>
#include <numbers>

#include "isingloop/pt_solver.hpp"

using namespace isingloop;
using TM = TagMonomial;

namespace {

constexpr double kPi = std::numbers::pi;

TaggedPoly fmono(int p, int q, long c) {
    TM m;
    m[TM::P] = p;
    m[TM::Q] = q;
    return TaggedPoly(m, CycloNum(c));
}

// plain Simpson rule on the period square, independent of the library quadrature
double simpson_mean_log_theta(double x, int n, double (*theta)(double, double, double) = theta_pt_planar) {
    double h = 2 * kPi / n, acc = 0;
    auto w = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) acc += w(i) * w(j) * std::log(theta(x, -kPi + h / 3 + i * h, -kPi + h / 3 + j * h));
    return acc * h * h / 9 / (4 * kPi * kPi);
}

}  // namespace

TEST_CASE("symbolic determinant examples") {
    auto psi = symbolic_psi_pt();
    TaggedPoly x1 = -(fmono(1, 0, 1) + fmono(-1, 0, 1) + fmono(0, 1, 1) + fmono(0, -1, 1) + fmono(1, -1, 1) +
                      fmono(-1, 1, 1));
    CHECK(psi.psi[1] == x1);
    CHECK(psi.psi[6] == TaggedPoly(1));
    CHECK(psi.psi[0] == TaggedPoly(1));
    CHECK(psi.theta(0, 0.3, 1.1) == doctest::Approx(1));
}

TEST_CASE("symbolic determinant equals the printed one") {
    CHECK(symbolic_psi_pt().psi == printed_psi_pt().psi);
}

TEST_CASE("integrands match their cosine forms") {
    for (double x : {0.05, 0.2, 0.6})
        for (double a : {0.0, 0.4, 2.1})
            for (double b : {-1.3, 0.0, 0.9}) {
                double C = std::cos(a) + std::cos(b) + std::cos(a - b);
                double x2 = x * x, x3 = x2 * x;
                double printed = 1 - 2 * x * C + 3 * x2 + x3 * (8 * std::cos(2 * (a - b)) + 4 * C) + 3 * x2 * x2 -
                                 2 * x3 * x2 * C + x3 * x3;
                double planar = std::pow(1 + x2, 3) + 8 * x3 - 2 * x * std::pow(1 - x2, 2) * C;
                CHECK(theta_pt(x, a, b) == doctest::Approx(printed).epsilon(1e-12));
                CHECK(theta_pt_planar(x, a, b) == doctest::Approx(planar).epsilon(1e-12));
            }
}

TEST_CASE("printed determinant matches its cosine form numerically") {
    auto psi = printed_psi_pt();
    for (double x : {0.05, 0.2, 0.5})
        for (double a : {0.0, 0.4, 2.1})
            for (double b : {-1.3, 0.0, 0.9}) CHECK(psi.theta(x, a, b) == doctest::Approx(theta_pt(x, a, b)).epsilon(1e-12));
}

TEST_CASE("planar layout gives the standard constant x^3 term") {
    auto psi = symbolic_psi_pt(WalkMode::Planar);
    // (1+x^2)^3 + 8x^3 - 2x(1-x^2)^2 * C
    for (double x : {0.1, 0.3})
        for (double a : {0.2, 1.7}) {
            double b = -0.6, C = std::cos(a) + std::cos(b) + std::cos(a - b);
            double ref = std::pow(1 + x * x, 3) + 8 * x * x * x - 2 * x * std::pow(1 - x * x, 2) * C;
            CHECK(psi.theta(x, a, b) == doctest::Approx(ref).epsilon(1e-12));
        }
    // both layouts coincide at zero angle
    for (double x : {0.1, 0.3, 0.7}) CHECK(psi.theta(x, 0, 0) == doctest::Approx(f_poly_eval(x)).epsilon(1e-12));
}

TEST_CASE("psi has degree six, unit constant and conjugate symmetry") {
    auto psi = printed_psi_pt();
    CHECK(psi.psi.order() == 6);
    for (int k = 0; k <= 6; ++k)
        for (const auto& [m, c] : psi.psi[k].terms()) {
            TM n = m;
            n[TM::P] = -m[TM::P];
            n[TM::Q] = -m[TM::Q];
            CHECK(psi.psi[k].coeff(n) == c);
        }
}

TEST_CASE("f_poly_eval examples") {
    CHECK(std::abs(f_poly_eval(2 - std::sqrt(3.0))) < 1e-12);
    CHECK(std::abs(f_poly_eval(2 + std::sqrt(3.0))) < 1e-9);
    CHECK(f_poly_eval(0) == 1);
    for (double x : {0.1, 0.4, 0.9}) CHECK(f_poly_eval(x) == doctest::Approx(theta_pt(x, 0, 0)).epsilon(1e-13));
}

TEST_CASE("critical_point examples") {
    auto c = critical_point();
    CHECK(c.x_c == doctest::Approx(2 - std::sqrt(3.0)).epsilon(1e-14));
    CHECK(std::abs(c.fprime_at_xc) < 1e-9);
    CHECK(std::abs(c.f_at_xc) < 1e-12);
    CHECK(c.Tc_over_J == doctest::Approx(1 / std::atanh(2 - std::sqrt(3.0))));
    // second derivative is measured, not assumed zero: f = (x^2-4x+1)^2 (x+1)^2 gives 2 (2x_c-4)^2 (x_c+1)^2
    double xc = 2 - std::sqrt(3.0);
    CHECK(c.fsecond_at_xc == doctest::Approx(2 * std::pow(2 * xc - 4, 2) * std::pow(xc + 1, 2)).epsilon(1e-10));
    CHECK(c.fsecond_at_xc > 1);

    CHECK(f_poly_eval(0.2) > 0);
    for (int i = 0; i <= 20000; ++i) CHECK(f_poly_eval(0.2 * i / 20000.0) > 0);
}

TEST_CASE("f factorises as a perfect square") {
    for (double x : {-0.7, 0.1, 0.26, 1.3, 4.0}) {
        double ref = std::pow((x * x - 4 * x + 1) * (x + 1), 2);
        CHECK(f_poly_eval(x) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    std::vector<double> t, w;
    gauss_legendre(10, t, w);
    for (int k = 0; k < 20; ++k) {
        double acc = 0;
        for (int i = 0; i < 10; ++i) acc += w[i] * std::pow(t[i], k);
        double ref = k % 2 ? 0.0 : 2.0 / (k + 1);
        CHECK(acc == doctest::Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("free_energy examples") {
    auto hot = free_energy(1e6);
    CHECK(hot.phi / hot.T == doctest::Approx(-std::log(2.0)).epsilon(1e-10));
    auto zero = free_energy_at_x(0);
    CHECK(zero.phi_over_T == doctest::Approx(-std::log(2.0)));

    // x = 0.1: two quadrature rules and two resolutions agree
    double T = 1 / std::atanh(0.1);
    auto g = free_energy(T);
    QuadratureOptions tr;
    tr.kind = QuadratureKind::Trapezoid;
    auto p = free_energy(T, 1, tr);
    CHECK(std::isfinite(g.phi));
    CHECK(g.phi == doctest::Approx(p.phi).epsilon(1e-12));
    CHECK(mean_log_theta(0.1).value == doctest::Approx(simpson_mean_log_theta(0.1, 256)).epsilon(1e-10));

    // T = T_c: refinement converges despite the log zero at the origin
    double xc = critical_point().x_c;
    QuadratureOptions coarse;
    coarse.gauss_nodes = 12;
    auto a = mean_log_theta(xc, coarse), b = mean_log_theta(xc);
    CHECK(std::isfinite(b.value));
    CHECK(std::abs(a.value - b.value) < 1e-9);
    CHECK(b.error < 1e-9);
    double s1 = simpson_mean_log_theta(xc, 200), s2 = simpson_mean_log_theta(xc, 400);
    CHECK(std::abs(s2 - b.value) < std::abs(s1 - b.value));
    CHECK(std::abs(s2 - b.value) < 1e-4);
}

TEST_CASE("theta is minimal at zero angle below x_c") {
    double xc = critical_point().x_c;
    for (double x : {0.05, 0.15, 0.25, xc}) {
        double m = theta_pt(x, 0, 0);
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) {
                double a = 2 * kPi * i / 64, b = 2 * kPi * j / 64;
                CHECK(theta_pt(x, a, b) >= m - 1e-14);
                CHECK(theta_pt_planar(x, a, b) >= m - 1e-14);
            }
    }
}

TEST_CASE("finite mode product agrees with quadrature") {
    double T = 1 / std::atanh(0.1);
    auto q = free_energy(T), m = free_energy_modes(T, 1, 32);
    CHECK(std::abs(q.phi - m.phi) / std::abs(q.phi) < 1e-4);
}

TEST_CASE("free energy decreases with temperature") {
    double prev = free_energy(0.5).phi;
    for (double T = 0.6; T < 20; T *= 1.2) {
        double f = free_energy(T).phi;
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("specific heat far from criticality") {
    double T = 1 / std::atanh(0.05);
    double cv = specific_heat(T, 1, 0.02 * T);
    // independent check: high-temperature series of -T d2(phi)/dT2 from the x-expansion
    // log Z/N = log 2 + 3 log cosh K + 2 t^3 + 3 t^4 + ..., so C = K^2 d2/dK2 of that
    double K = 1 / T;
    double lead = 3 * K * K / std::pow(std::cosh(K), 2) + 12 * std::pow(K, 3) + 36 * std::pow(K, 4);
    CHECK(cv > 0);
    CHECK(cv < 0.02);
    CHECK(cv == doctest::Approx(lead).epsilon(0.03));
}

TEST_CASE("specific heat scan diverges logarithmically on each side") {
    ScanOptions opt;
    opt.points_per_side = 8;
    auto pts = specific_heat_grid(opt);
    CHECK(pts.size() == 16);
    for (const auto& p : pts) CHECK(p.cv >= 0);
    auto fit = specific_heat_scan(pts, opt);
    CHECK(fit.B_below < 0);
    CHECK(fit.B_above < 0);
    CHECK(fit.B < 0);
    CHECK(fit.r2_below > 0.99);
    CHECK(fit.r2_above > 0.99);
    CHECK(fit.r2 > 0.99);
}

TEST_CASE("printed integrand has the wrong low-temperature limit") {
    // ground state energy -3J with zero entropy; the printed x^3 term leaves phi -> -3 + T log 2
    QuadratureOptions printed;
    printed.integrand = WalkMode::Printed;
    CHECK(free_energy(0.2).phi == doctest::Approx(-3).epsilon(1e-9));
    CHECK(free_energy(0.2, 1, printed).phi == doctest::Approx(-3 + 0.2 * std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("scan rejects windows inside the blackout or too fine for differences") {
    ScanOptions opt;
    opt.window_lo = 1e-6;
    CHECK_THROWS_AS(specific_heat_grid(opt), GridTooCoarse);
    opt.window_lo = 1e-4;
    opt.min_step = 1e-3;
    try {
        specific_heat_grid(opt);
        FAIL("expected GridTooCoarse");
    } catch (const GridTooCoarse& e) {
        CHECK(e.required > 0);
    }
}

TEST_CASE("fit_line recovers an exact line") {
    std::vector<double> x = {1, 2, 3, 4}, y = {3, 5, 7, 9};
    auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.r2 == doctest::Approx(1));
}
