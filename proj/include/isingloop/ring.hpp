#pragma once

#include <array>
#include <complex>
#include <cstdlib>
#include <initializer_list>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <Eigen/Core>

namespace isingloop {

// Element of Q(zeta), zeta = exp(i pi/6), in the basis {1, zeta, zeta^2, zeta^3}.
class CycloNum {
public:
    CycloNum() = default;
    CycloNum(long v) { c_[0] = v; }
    CycloNum(const mpq_class& v) { c_[0] = v; }
    CycloNum(const mpq_class& a, const mpq_class& b, const mpq_class& c, const mpq_class& d)
        : c_{a, b, c, d} {}

    const mpq_class& operator[](int i) const { return c_[i]; }
    const std::array<mpq_class, 4>& coords() const { return c_; }

    bool is_zero() const { return sgn(c_[0]) == 0 && sgn(c_[1]) == 0 && sgn(c_[2]) == 0 && sgn(c_[3]) == 0; }
    bool is_rational() const { return sgn(c_[1]) == 0 && sgn(c_[2]) == 0 && sgn(c_[3]) == 0; }

    CycloNum& operator+=(const CycloNum& o);
    CycloNum& operator-=(const CycloNum& o);
    CycloNum& operator*=(const CycloNum& o);
    CycloNum& operator*=(const mpq_class& q);
    CycloNum operator-() const;

    friend CycloNum operator+(CycloNum a, const CycloNum& b) { return a += b; }
    friend CycloNum operator-(CycloNum a, const CycloNum& b) { return a -= b; }
    friend CycloNum operator*(CycloNum a, const CycloNum& b) { return a *= b; }
    friend bool operator==(const CycloNum& a, const CycloNum& b) { return a.c_ == b.c_; }

    std::complex<double> to_complex() const;
    std::string str() const;

private:
    std::array<mpq_class, 4> c_;
};

// A^k with A = zeta, k taken mod 12.
CycloNum cyclo_pow(int k);

// Exponents of u,v,w (unsigned), l,m,n (signed), e_p,e_q,e_r (Fourier symbols).
struct TagMonomial {
    enum Var { U, V, W, L, M, N, P, Q, R };
    std::array<int, 9> e{};

    static TagMonomial one() { return {}; }
    static TagMonomial var(Var v, int power = 1) {
        TagMonomial t;
        t.e[v] = power;
        return t;
    }

    int operator[](Var v) const { return e[v]; }
    int& operator[](Var v) { return e[v]; }

    bool has_fourier() const { return e[P] != 0 || e[Q] != 0 || e[R] != 0; }
    int fourier_l1() const { return std::abs(e[P]) + std::abs(e[Q]) + std::abs(e[R]); }

    friend TagMonomial operator*(TagMonomial a, const TagMonomial& b) {
        for (int i = 0; i < 9; ++i) a.e[i] += b.e[i];
        return a;
    }
    friend auto operator<=>(const TagMonomial&, const TagMonomial&) = default;

    std::string str() const;
};

class TaggedPoly {
public:
    using Terms = std::map<TagMonomial, CycloNum>;

    TaggedPoly() = default;
    TaggedPoly(long v) { if (v != 0) terms_[TagMonomial::one()] = CycloNum(v); }
    TaggedPoly(const CycloNum& c) { if (!c.is_zero()) terms_[TagMonomial::one()] = c; }
    TaggedPoly(const TagMonomial& m, const CycloNum& c = CycloNum(1)) { if (!c.is_zero()) terms_[m] = c; }

    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    CycloNum coeff(const TagMonomial& m) const;
    CycloNum constant() const { return coeff(TagMonomial::one()); }

    void add_term(const TagMonomial& m, const CycloNum& c);

    TaggedPoly& operator+=(const TaggedPoly& o);
    TaggedPoly& operator-=(const TaggedPoly& o);
    TaggedPoly& operator*=(const TaggedPoly& o);
    TaggedPoly& operator*=(const mpq_class& q);
    TaggedPoly operator-() const;

    friend TaggedPoly operator+(TaggedPoly a, const TaggedPoly& b) { return a += b; }
    friend TaggedPoly operator-(TaggedPoly a, const TaggedPoly& b) { return a -= b; }
    friend TaggedPoly operator*(const TaggedPoly& a, const TaggedPoly& b);
    friend bool operator==(const TaggedPoly& a, const TaggedPoly& b) { return a.terms_ == b.terms_; }

    std::string str() const;

private:
    Terms terms_;
};

TaggedPoly poly_mul(const TaggedPoly& a, const TaggedPoly& b);

// Substitute the listed variables by 1 (exponent dropped).
TaggedPoly set_to_one(const TaggedPoly& p, std::initializer_list<TagMonomial::Var> vars);

// Numerical value with e_p = exp(i wp) etc. and all other tags set to 1.
std::complex<double> eval_fourier(const TaggedPoly& p, double wp, double wq, double wr);

struct BudgetExceeded : std::runtime_error {
    int reached_order;
    BudgetExceeded(int reached, const std::string& what) : std::runtime_error(what), reached_order(reached) {}
};

struct SeriesOptions {
    // Drop terms whose Fourier L1 norm exceeds the remaining x-order.
    // Sound only for inputs that carry at most one Fourier unit per power of x,
    // and only when the result is mode-projected afterwards.
    bool projected_prune = false;
    std::size_t term_budget = 10'000'000;
};

class XSeries {
public:
    XSeries() = default;
    explicit XSeries(int order) : c_(order + 1) {}
    XSeries(int order, std::vector<TaggedPoly> coeffs);

    int order() const { return static_cast<int>(c_.size()) - 1; }
    const TaggedPoly& operator[](int k) const { return c_[k]; }
    TaggedPoly& operator[](int k) { return c_[k]; }
    const std::vector<TaggedPoly>& coeffs() const { return c_; }

    XSeries truncated(int order) const;
    std::size_t term_count() const;

    XSeries& operator+=(const XSeries& o);
    XSeries& operator-=(const XSeries& o);
    friend XSeries operator+(XSeries a, const XSeries& b) { return a += b; }
    friend XSeries operator-(XSeries a, const XSeries& b) { return a -= b; }
    friend XSeries operator*(const XSeries& a, const XSeries& b);
    friend bool operator==(const XSeries& a, const XSeries& b) { return a.c_ == b.c_; }

    XSeries scaled(const mpq_class& q) const;

private:
    std::vector<TaggedPoly> c_;
};

XSeries series_mul(const XSeries& a, const XSeries& b, const SeriesOptions& opt = {});
XSeries series_sqrt(const XSeries& s, const SeriesOptions& opt = {});
XSeries series_log(const XSeries& s, const SeriesOptions& opt = {});
XSeries project_mode_sum(const XSeries& s, int L);
TaggedPoly project_mode_sum(const TaggedPoly& p, int L);

// Generalized binomial coefficient (a choose k) for rational a.
mpq_class binomial(const mpq_class& a, int k);

// Division-free determinant by Laplace expansion over column subsets.
template <class Scalar, class Matrix>
Scalar laplace_det(const Matrix& m, int n, const Scalar& zero, const Scalar& one) {
    std::vector<Scalar> minor(std::size_t(1) << n);
    minor[0] = one;
    for (unsigned mask = 1; mask < minor.size(); ++mask) {
        int row = __builtin_popcount(mask) - 1, pos = 0;
        Scalar acc = zero;
        for (int j = n - 1; j >= 0; --j) {
            if (!(mask & (1u << j))) continue;
            // sign from the number of selected columns to the right of j
            Scalar term = m(row, j) * minor[mask & ~(1u << j)];
            if (pos % 2 == 0) acc += term;
            else acc -= term;
            ++pos;
        }
        minor[mask] = acc;
    }
    return minor.back();
}

}  // namespace isingloop

namespace Eigen {
template <>
struct NumTraits<isingloop::TaggedPoly> : GenericNumTraits<isingloop::TaggedPoly> {
    using Real = isingloop::TaggedPoly;
    using NonInteger = isingloop::TaggedPoly;
    using Nested = isingloop::TaggedPoly;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 8,
        AddCost = 32,
        MulCost = 128
    };
};
}  // namespace Eigen
