#pragma once

#include <vector>

#include "isingloop/ring.hpp"
#include "isingloop/walker.hpp"

namespace isingloop {

struct PsiPolynomial {
    WalkMode layout = WalkMode::Printed;
    XSeries psi{6};  // coefficients of x^0..x^6 in Fourier symbols

    double theta(double x, double w1, double w2, double w3 = 0) const;
};

// det(1 - x Omega) over the exact ring, Omega = fourier_matrix(build_pt_propagator(layout)).
PsiPolynomial symbolic_psi_pt(WalkMode layout = WalkMode::Printed);

// The printed determinant, transcribed from its cosine form.
PsiPolynomial printed_psi_pt();

// Integrand of the free energy, as printed.
double theta_pt(double x, double w1, double w2);
// Same integrand from the planar layout: (1+x^2)^3 + 8x^3 - 2x(1-x^2)^2 * sum cos.
double theta_pt_planar(double x, double w1, double w2);
double f_poly_eval(double x);
double f_poly_derivative(double x, int order);

struct CriticalFit {
    double x_c = 0;
    double Tc_over_J = 0;
    double f_at_xc = 0;
    double fprime_at_xc = 0;
    double fsecond_at_xc = 0;
    // specific-heat regression, filled by specific_heat_scan
    double B = 0, intercept = 0, r2 = 0;
    double B_below = 0, intercept_below = 0, r2_below = 0;
    double B_above = 0, intercept_above = 0, r2_above = 0;
    double window_lo = 0, window_hi = 0;
};

CriticalFit critical_point();

enum class QuadratureKind { Graded, Trapezoid };

struct QuadratureOptions {
    QuadratureKind kind = QuadratureKind::Graded;
    WalkMode integrand = WalkMode::Planar;  // Printed selects theta_pt
    int trapezoid_n = 128;      // nodes per axis for the periodic rule
    int gauss_nodes = 20;       // per panel for the graded rule
    int angular_panels = 4;     // per triangle side
    double innermost = 1e-10;   // first radial panel edge (fraction of the half-width)
};

struct QuadratureValue {
    double value = 0;
    double error = 0;
};

// (1/(2pi)^2) * integral of log theta over the period square.
QuadratureValue mean_log_theta(double x, const QuadratureOptions& opt = {});

struct ThermoResult {
    double T = 0, J = 1, x = 0;
    double phi = 0;   // free energy per site
    double phi_over_T = 0;
    double cv = 0;    // filled by specific-heat routines
    double error = 0;
};

ThermoResult free_energy(double T, double J = 1, const QuadratureOptions& opt = {});
// Same free energy from the finite L x L mode sum.
ThermoResult free_energy_modes(double T, double J, int L, WalkMode integrand = WalkMode::Planar);
// Direct evaluation at a given x (T = J / artanh x); x = 0 is the infinite-temperature limit with T = 1.
ThermoResult free_energy_at_x(double x, double J = 1, const QuadratureOptions& opt = {});

struct ScanOptions {
    double window_lo = 1e-4, window_hi = 1e-2;  // |x - x_c|
    int points_per_side = 15;
    double blackout = 1e-5;
    double fd_fraction = 0.02;  // stencil half-width as a fraction of |T - T_c|
    double min_step = 1e-9;     // relative to T
    QuadratureOptions quad;
};

struct ScanPoint {
    double x = 0, T = 0, cv = 0, phi = 0, error = 0;
    int side = 0;  // -1 below x_c, +1 above
};

struct GridTooCoarse : std::invalid_argument {
    double required;
    GridTooCoarse(double req, const std::string& what) : std::invalid_argument(what), required(req) {}
};

// C_V = -T d^2 Phi / dT^2 by a central difference at each temperature.
double specific_heat(double T, double J, double h, const QuadratureOptions& opt = {});

std::vector<ScanPoint> specific_heat_grid(const ScanOptions& opt = {});
CriticalFit specific_heat_scan(const std::vector<ScanPoint>& points, const ScanOptions& opt = {});

struct LineFit {
    double slope = 0, intercept = 0, r2 = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Gauss-Legendre nodes and weights on [-1,1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace isingloop
