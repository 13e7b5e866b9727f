#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <gmpxx.h>

#include "isingloop/pt_solver.hpp"
#include "isingloop/ring.hpp"

namespace isingloop {

// det(1 - x Omega) for the tagged cubic propagator, x^0..x^6.
struct TaggedPsi {
    XSeries psi{6};
};

TaggedPsi symbolic_psi_sc();
// The printed 27-term determinant, transcribed monomial by monomial.
TaggedPsi printed_psi_sc();

// All six tags set to 1.
PsiPolynomial naive_reduce(const TaggedPsi& psi);
// The printed reduction with tags set to 1, transcribed from its exponential form.
PsiPolynomial printed_naive_sc();
// Cosine form as printed under the reduction; the body-diagonal term reads cos(2(w1+w2+w3)).
double theta_sc_printed(double x, double w1, double w2, double w3);

// Coefficients of the naive Psi at w1 = w2 = w3 = 0, lowest power first.
std::vector<mpq_class> zero_angle_coefficients(const PsiPolynomial& naive);
// First zero of the zero-angle polynomial on (0, 1), located as a local minimum.
double zero_angle_root(const std::vector<mpq_class>& coeffs);

struct ScSeriesOptions {
    int max_order = 8;
    std::size_t term_budget = 10'000'000;
    bool projected_prune = false;
    int oracle_order = 8;  // oracle runs stop here
    bool naive = false;    // set all tags to 1 and skip the actions
};

// Psi^(1/2) as a tagged series to order R.
XSeries expand_sqrt(const TaggedPsi& psi, int order, const ScSeriesOptions& opt = {});
// The printed order-1 and order-2 terms of Psi^(1/2).
XSeries printed_sqrt_fixture();
// log Psi to order R, then the zero Fourier-exponent part (mode sum with L > R).
XSeries expand_log(const TaggedPsi& psi, int order, const ScSeriesOptions& opt = {});

// True when every term at x^k has du + dv + dw = 2k.
bool step_pairing_holds(const XSeries& s);

struct IntegrityError : std::logic_error {
    using std::logic_error::logic_error;
};

// Terms sharing u^a v^b w^c at one power of x.
struct GenericGroup {
    std::array<int, 3> key{};                           // (a, b, c)
    std::map<std::array<int, 3>, CycloNum> members;     // (el, em, en) -> coefficient
    int r = 0;
};

std::vector<GenericGroup> group_terms(const TaggedPoly& p, int power);

struct FilterResult {
    XSeries series;  // constant coefficients only
    int kept = 0, dropped = 0;
};

// Action i: a group with an (lmn)^0 member is summed with l=m=n=1 and u^a v^b w^c = 1.
// Action ii: any other group is dropped.
FilterResult filter_series(const XSeries& series);
XSeries apply_actions(const XSeries& series);
// The actions applied to one graph's loop sum.
CycloNum filter_graph_sum(const TaggedPoly& total);

struct SeriesRow {
    int r = 0;
    mpq_class filter;
    bool filter_rational = true;
    std::optional<mpq_class> ht, oracle;
    bool anomaly = false;     // nonzero odd order or irrational value
    bool agree = false;       // filter == oracle, when the oracle value exists
    bool agree_ht = false;
};

std::vector<SeriesRow> extract_gr(const XSeries& filtered);

struct SeriesReport {
    std::string source;         // "sqrt" or "log"
    int order = 0;
    std::string window;         // oracle lattice used
    std::string normalization;
    bool naive = false;
    int groups_kept = 0, groups_dropped = 0;
    std::vector<SeriesRow> rows;

    bool all_agree() const;
};

SeriesReport compare_with_oracle(std::vector<SeriesRow> rows, const std::map<int, mpq_class>& oracle,
                                 const std::map<int, mpq_class>& ht = {});

// Both pipelines against the oracle: per-site connected counts for the square root,
// the per-site log series for the logarithm.
struct ScSeriesRun {
    SeriesReport sqrt_report, log_report;
    bool oracle_complete = true;
};

ScSeriesRun run_sc_series(int order, const ScSeriesOptions& opt = {});

}  // namespace isingloop
