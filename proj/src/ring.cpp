#include "isingloop/ring.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace isingloop {

CycloNum& CycloNum::operator+=(const CycloNum& o) {
    for (int i = 0; i < 4; ++i) c_[i] += o.c_[i];
    return *this;
}

CycloNum& CycloNum::operator-=(const CycloNum& o) {
    for (int i = 0; i < 4; ++i) c_[i] -= o.c_[i];
    return *this;
}

CycloNum& CycloNum::operator*=(const mpq_class& q) {
    for (auto& v : c_) v *= q;
    return *this;
}

CycloNum& CycloNum::operator*=(const CycloNum& o) {
    if (o.is_rational()) return *this *= o.c_[0];
    if (is_rational()) {
        mpq_class q = c_[0];
        *this = o;
        return *this *= q;
    }
    std::array<mpq_class, 7> p;
    for (int i = 0; i < 4; ++i) {
        if (sgn(c_[i]) == 0) continue;
        for (int j = 0; j < 4; ++j)
            if (sgn(o.c_[j]) != 0) p[i + j] += c_[i] * o.c_[j];
    }
    // zeta^6 = -1, zeta^5 = zeta^3 - zeta, zeta^4 = zeta^2 - 1
    p[0] -= p[6];
    p[3] += p[5];
    p[1] -= p[5];
    p[2] += p[4];
    p[0] -= p[4];
    for (int i = 0; i < 4; ++i) c_[i] = p[i];
    return *this;
}

CycloNum CycloNum::operator-() const {
    CycloNum r;
    for (int i = 0; i < 4; ++i) r.c_[i] = -c_[i];
    return r;
}

std::complex<double> CycloNum::to_complex() const {
    std::complex<double> z = std::polar(1.0, std::numbers::pi / 6), acc = 0, zk = 1;
    for (int i = 0; i < 4; ++i) {
        acc += c_[i].get_d() * zk;
        zk *= z;
    }
    return acc;
}

std::string CycloNum::str() const {
    if (is_rational()) return c_[0].get_str();
    std::ostringstream os;
    os << "(";
    bool first = true;
    for (int i = 0; i < 4; ++i) {
        if (sgn(c_[i]) == 0) continue;
        if (!first) os << (sgn(c_[i]) > 0 ? " + " : " - ");
        else if (sgn(c_[i]) < 0) os << "-";
        first = false;
        mpq_class a = abs(c_[i]);
        if (i == 0) os << a.get_str();
        else {
            if (a != 1) os << a.get_str() << "*";
            os << "z";
            if (i > 1) os << "^" << i;
        }
    }
    os << ")";
    return os.str();
}

CycloNum cyclo_pow(int k) {
    static const std::array<CycloNum, 12> table = [] {
        std::array<CycloNum, 12> t;
        t[0] = CycloNum(1);
        CycloNum z(0, 1, 0, 0);
        for (int i = 1; i < 12; ++i) t[i] = t[i - 1] * z;
        return t;
    }();
    return table[((k % 12) + 12) % 12];
}

std::string TagMonomial::str() const {
    static const char* names[9] = {"u", "v", "w", "l", "m", "n", "ep", "eq", "er"};
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < 9; ++i) {
        if (e[i] == 0) continue;
        if (!first) os << "*";
        first = false;
        os << names[i];
        if (e[i] != 1) os << "^" << e[i];
    }
    return first ? "1" : os.str();
}

CycloNum TaggedPoly::coeff(const TagMonomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? CycloNum() : it->second;
}

void TaggedPoly::add_term(const TagMonomial& m, const CycloNum& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

TaggedPoly& TaggedPoly::operator+=(const TaggedPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

TaggedPoly& TaggedPoly::operator-=(const TaggedPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

TaggedPoly& TaggedPoly::operator*=(const TaggedPoly& o) {
    *this = poly_mul(*this, o);
    return *this;
}

TaggedPoly& TaggedPoly::operator*=(const mpq_class& q) {
    if (sgn(q) == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) c *= q;
    return *this;
}

TaggedPoly TaggedPoly::operator-() const {
    TaggedPoly r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

TaggedPoly operator*(const TaggedPoly& a, const TaggedPoly& b) { return poly_mul(a, b); }

TaggedPoly poly_mul(const TaggedPoly& a, const TaggedPoly& b) {
    TaggedPoly r;
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) r.add_term(ma * mb, ca * cb);
    return r;
}

std::string TaggedPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c.str();
        if (m != TagMonomial::one()) os << "*" << m.str();
    }
    return os.str();
}

TaggedPoly set_to_one(const TaggedPoly& p, std::initializer_list<TagMonomial::Var> vars) {
    TaggedPoly r;
    for (const auto& [m, c] : p.terms()) {
        TagMonomial k = m;
        for (auto v : vars) k.e[v] = 0;
        r.add_term(k, c);
    }
    return r;
}

std::complex<double> eval_fourier(const TaggedPoly& p, double wp, double wq, double wr) {
    std::complex<double> acc = 0;
    for (const auto& [m, c] : p.terms()) {
        double ph = m.e[TagMonomial::P] * wp + m.e[TagMonomial::Q] * wq + m.e[TagMonomial::R] * wr;
        acc += c.to_complex() * std::polar(1.0, ph);
    }
    return acc;
}

XSeries::XSeries(int order, std::vector<TaggedPoly> coeffs) : c_(order + 1) {
    for (int k = 0; k <= order && k < static_cast<int>(coeffs.size()); ++k) c_[k] = std::move(coeffs[k]);
}

XSeries XSeries::truncated(int order) const {
    XSeries r(order);
    for (int k = 0; k <= order && k <= this->order(); ++k) r.c_[k] = c_[k];
    return r;
}

std::size_t XSeries::term_count() const {
    std::size_t n = 0;
    for (const auto& p : c_) n += p.size();
    return n;
}

XSeries& XSeries::operator+=(const XSeries& o) {
    int R = std::min(order(), o.order());
    c_.resize(R + 1);
    for (int k = 0; k <= R; ++k) c_[k] += o.c_[k];
    return *this;
}

XSeries& XSeries::operator-=(const XSeries& o) {
    int R = std::min(order(), o.order());
    c_.resize(R + 1);
    for (int k = 0; k <= R; ++k) c_[k] -= o.c_[k];
    return *this;
}

XSeries XSeries::scaled(const mpq_class& q) const {
    XSeries r = *this;
    for (auto& p : r.c_) p *= q;
    return r;
}

XSeries operator*(const XSeries& a, const XSeries& b) { return series_mul(a, b); }

XSeries series_mul(const XSeries& a, const XSeries& b, const SeriesOptions& opt) {
    int R = std::min(a.order(), b.order());
    XSeries r(R);
    for (int k = 0; k <= R; ++k) {
        TaggedPoly acc;
        for (int i = 0; i <= k; ++i) {
            if (a[i].is_zero() || b[k - i].is_zero()) continue;
            for (const auto& [ma, ca] : a[i].terms())
                for (const auto& [mb, cb] : b[k - i].terms()) {
                    TagMonomial m = ma * mb;
                    if (opt.projected_prune && m.fourier_l1() > R - k) continue;
                    acc.add_term(m, ca * cb);
                }
        }
        if (acc.size() > opt.term_budget)
            throw BudgetExceeded(k - 1, "term budget exceeded at x^" + std::to_string(k));
        r[k] = std::move(acc);
    }
    return r;
}

mpq_class binomial(const mpq_class& a, int k) {
    mpq_class r = 1;
    for (int i = 0; i < k; ++i) {
        r *= (a - i);
        r /= (i + 1);
    }
    return r;
}

namespace {

XSeries unit_offset(const XSeries& s, const char* what) {
    if (!(s[0] == TaggedPoly(1)))
        throw std::domain_error(std::string(what) + ": constant term must equal 1");
    XSeries d = s;
    d[0] = TaggedPoly();
    return d;
}

// sum_k w(k) d^k for k = 0..R, d without constant term
template <class Weight>
XSeries power_sum(const XSeries& d, Weight w, const SeriesOptions& opt) {
    int R = d.order();
    XSeries acc(R), pw(R);
    pw[0] = TaggedPoly(1);
    mpq_class w0 = w(0);
    if (sgn(w0) != 0) acc[0] = TaggedPoly(1) * TaggedPoly(CycloNum(w0));
    for (int k = 1; k <= R; ++k) {
        pw = series_mul(pw, d, opt);
        acc += pw.scaled(w(k));
    }
    return acc;
}

}  // namespace

XSeries series_sqrt(const XSeries& s, const SeriesOptions& opt) {
    XSeries d = unit_offset(s, "series_sqrt");
    const mpq_class half(1, 2);
    return power_sum(d, [&](int k) { return binomial(half, k); }, opt);
}

XSeries series_log(const XSeries& s, const SeriesOptions& opt) {
    XSeries d = unit_offset(s, "series_log");
    return power_sum(
        d,
        [](int k) {
            if (k == 0) return mpq_class(0);
            return mpq_class(k % 2 == 1 ? 1 : -1, k);
        },
        opt);
}

TaggedPoly project_mode_sum(const TaggedPoly& p, int L) {
    TaggedPoly r;
    auto divisible = [L](int e) { return e % L == 0; };
    for (const auto& [m, c] : p.terms())
        if (divisible(m.e[TagMonomial::P]) && divisible(m.e[TagMonomial::Q]) && divisible(m.e[TagMonomial::R]))
            r.add_term(m, c);
    return r;
}

XSeries project_mode_sum(const XSeries& s, int L) {
    XSeries r(s.order());
    for (int k = 0; k <= s.order(); ++k) r[k] = project_mode_sum(s[k], L);
    return r;
}

}  // namespace isingloop
