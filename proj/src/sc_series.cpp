#include "isingloop/sc_series.hpp"

#include <cmath>
#include <functional>

#include "isingloop/oracle.hpp"
#include "isingloop/walker.hpp"

namespace isingloop {

namespace {

using Var = TagMonomial::Var;

TaggedPoly term(long c, std::initializer_list<std::pair<Var, int>> powers) {
    TagMonomial m;
    for (auto [v, k] : powers) m[v] += k;
    return TaggedPoly(m, CycloNum(c));
}

XSeries padded(const XSeries& s, int order) {
    XSeries out(order);
    for (int k = 0; k <= std::min(order, s.order()); ++k) out[k] = s[k];
    return out;
}

SeriesOptions series_options(const ScSeriesOptions& opt) {
    SeriesOptions s;
    s.projected_prune = opt.projected_prune;
    s.term_budget = opt.term_budget;
    return s;
}

void check_order(int order, const ScSeriesOptions& opt) {
    if (order < 0 || order > opt.max_order)
        throw std::invalid_argument("order " + std::to_string(order) + " outside 0.." + std::to_string(opt.max_order));
}

// Runs f at the requested order; on budget failure reports the highest order that fits.
template <class F>
XSeries with_reached_order(int order, F f) {
    try {
        return f(order);
    } catch (const BudgetExceeded& e) {
        int reached = -1;
        for (int r = std::min(order - 1, e.reached_order); r >= 0 && reached < 0; --r) {
            try {
                f(r);
                reached = r;
            } catch (const BudgetExceeded&) {
            }
        }
        throw BudgetExceeded(reached, e.what());
    }
}

}  // namespace

TaggedPsi symbolic_psi_sc() {
    PropagatorMatrix f = fourier_matrix(build_sc_propagator());
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
    return {laplace_det<XSeries>(at, 6, zero, one)};
}

TaggedPsi printed_psi_sc() {
    using enum TagMonomial::Var;
    TaggedPsi t;
    auto& p = t.psi;
    p[0] = TaggedPoly(1);
    p[1] = term(-1, {{P, 1}, {U, 2}, {L, -2}}) + term(-1, {{P, -1}, {L, 2}, {U, 2}}) +
           term(-1, {{Q, 1}, {V, 2}, {M, -2}}) + term(-1, {{Q, -1}, {M, 2}, {V, 2}}) +
           term(-1, {{R, 1}, {W, 2}, {N, -2}}) + term(-1, {{R, -1}, {N, 2}, {W, 2}});
    p[2] = term(1, {{U, 4}}) + term(1, {{V, 4}}) + term(1, {{W, 4}});
    p[3] = term(1, {{Q, 1}, {U, 4}, {V, 2}, {M, -2}}) + term(1, {{Q, -1}, {M, 2}, {U, 4}, {V, 2}}) +
           term(1, {{P, 1}, {U, 2}, {V, 4}, {L, -2}}) + term(1, {{P, -1}, {L, 2}, {U, 2}, {V, 4}}) +
           term(1, {{R, 1}, {U, 4}, {W, 2}, {N, -2}}) + term(1, {{R, -1}, {N, 2}, {U, 4}, {W, 2}}) +
           term(4, {{P, 1}, {Q, 1}, {R, 1}, {U, 2}, {V, 2}, {W, 2}, {L, -2}, {M, -2}, {N, -2}}) +
           term(4, {{P, -1}, {Q, -1}, {R, -1}, {L, 2}, {M, 2}, {N, 2}, {U, 2}, {V, 2}, {W, 2}}) +
           term(1, {{R, 1}, {V, 4}, {W, 2}, {N, -2}}) + term(1, {{R, -1}, {N, 2}, {V, 4}, {W, 2}}) +
           term(1, {{P, 1}, {U, 2}, {W, 4}, {L, -2}}) + term(1, {{P, -1}, {L, 2}, {U, 2}, {W, 4}}) +
           term(1, {{Q, 1}, {V, 2}, {W, 4}, {M, -2}}) + term(1, {{Q, -1}, {M, 2}, {V, 2}, {W, 4}});
    p[4] = term(1, {{U, 4}, {V, 4}}) + term(1, {{U, 4}, {W, 4}}) + term(1, {{V, 4}, {W, 4}});
    p[5] = term(-1, {{R, 1}, {U, 4}, {V, 4}, {W, 2}, {N, -2}}) + term(-1, {{R, -1}, {N, 2}, {U, 4}, {V, 4}, {W, 2}}) +
           term(-1, {{Q, 1}, {U, 4}, {V, 2}, {W, 4}, {M, -2}}) + term(-1, {{Q, -1}, {M, 2}, {U, 4}, {V, 2}, {W, 4}}) +
           term(-1, {{P, 1}, {U, 2}, {V, 4}, {W, 4}, {L, -2}}) + term(-1, {{P, -1}, {L, 2}, {U, 2}, {V, 4}, {W, 4}});
    p[6] = term(1, {{U, 4}, {V, 4}, {W, 4}});
    return t;
}

PsiPolynomial naive_reduce(const TaggedPsi& psi) {
    using enum TagMonomial::Var;
    PsiPolynomial out;
    out.layout = WalkMode::TaggedSC;
    for (int k = 0; k <= 6; ++k) out.psi[k] = set_to_one(psi.psi[k], {U, V, W, L, M, N});
    return out;
}

PsiPolynomial printed_naive_sc() {
    using enum TagMonomial::Var;
    PsiPolynomial out;
    out.layout = WalkMode::TaggedSC;
    auto& p = out.psi;
    TaggedPoly singles;
    for (Var v : {P, Q, R})
        for (int s : {1, -1}) singles += term(1, {{v, s}});
    p[0] = TaggedPoly(1);
    p[1] = -singles;
    p[2] = TaggedPoly(3);
    p[3] = singles * TaggedPoly(2) + term(4, {{P, -1}, {Q, -1}, {R, -1}}) + term(4, {{P, 1}, {Q, 1}, {R, 1}});
    p[4] = TaggedPoly(3);
    p[5] = -singles;
    p[6] = TaggedPoly(1);
    return out;
}

double theta_sc_printed(double x, double w1, double w2, double w3) {
    const double c = std::cos(w1) + std::cos(w2) + std::cos(w3);
    const double x2 = x * x, x3 = x2 * x;
    return 1 - 2 * x * c + 3 * x2 + x3 * (8 * std::cos(2 * (w1 + w2 + w3)) + 4 * c) + 3 * x2 * x2 -
           2 * x2 * x3 * c + x3 * x3;
}

std::vector<mpq_class> zero_angle_coefficients(const PsiPolynomial& naive) {
    std::vector<mpq_class> out;
    for (int k = 0; k <= naive.psi.order(); ++k) {
        CycloNum s;
        for (const auto& [m, c] : naive.psi[k].terms()) s += c;
        if (!s.is_rational()) throw std::invalid_argument("zero-angle coefficient is not rational");
        out.push_back(s[0]);
    }
    return out;
}

double zero_angle_root(const std::vector<mpq_class>& coeffs) {
    auto deriv = [&](double x) {
        double acc = 0;
        for (int k = int(coeffs.size()) - 1; k >= 1; --k) acc = acc * x + k * coeffs[k].get_d();
        return acc;
    };
    const int n = 1000;
    for (int i = 1; i < n; ++i) {
        double a = double(i - 1) / n, b = double(i) / n;
        if (!(deriv(a) < 0 && deriv(b) >= 0)) continue;
        for (int it = 0; it < 200 && b - a > 0; ++it) {
            double mid = 0.5 * (a + b);
            if (mid == a || mid == b) break;
            (deriv(mid) < 0 ? a : b) = mid;
        }
        return 0.5 * (a + b);
    }
    throw std::runtime_error("zero-angle polynomial has no minimum on (0, 1)");
}

XSeries expand_sqrt(const TaggedPsi& psi, int order, const ScSeriesOptions& opt) {
    check_order(order, opt);
    return with_reached_order(order, [&](int r) { return series_sqrt(padded(psi.psi, r), series_options(opt)); });
}

XSeries printed_sqrt_fixture() {
    using enum TagMonomial::Var;
    TaggedPoly bracket = term(-1, {{P, 1}, {U, 2}, {L, -2}}) + term(-1, {{P, -1}, {L, 2}, {U, 2}}) +
                         term(-1, {{Q, 1}, {V, 2}, {M, -2}}) + term(-1, {{Q, -1}, {M, 2}, {V, 2}}) +
                         term(-1, {{R, 1}, {W, 2}, {N, -2}}) + term(-1, {{R, -1}, {N, 2}, {W, 2}});
    XSeries s(2);
    s[0] = TaggedPoly(1);
    s[1] = bracket;
    s[1] *= mpq_class(1, 2);
    TaggedPoly sq = bracket * bracket;
    sq *= mpq_class(1, 4);
    s[2] = term(1, {{U, 4}}) + term(1, {{V, 4}}) + term(1, {{W, 4}}) - sq;
    s[2] *= mpq_class(1, 2);
    return s;
}

XSeries expand_log(const TaggedPsi& psi, int order, const ScSeriesOptions& opt) {
    check_order(order, opt);
    return with_reached_order(order, [&](int r) {
        return project_mode_sum(series_log(padded(psi.psi, r), series_options(opt)), r + 1);
    });
}

bool step_pairing_holds(const XSeries& s) {
    using enum TagMonomial::Var;
    for (int k = 0; k <= s.order(); ++k)
        for (const auto& [m, c] : s[k].terms())
            if (m[U] + m[V] + m[W] != 2 * k) return false;
    return true;
}

std::vector<GenericGroup> group_terms(const TaggedPoly& p, int power) {
    using enum TagMonomial::Var;
    std::map<std::array<int, 3>, GenericGroup> groups;
    for (const auto& [m, c] : p.terms()) {
        if (m.has_fourier()) throw std::invalid_argument("group_terms: series is not mode-projected");
        std::array<int, 3> key{m[U], m[V], m[W]};
        int deg = key[0] + key[1] + key[2];
        if (deg % 2 != 0) throw IntegrityError("odd u+v+w degree " + std::to_string(deg));
        if (deg != 2 * power)
            throw IntegrityError("u+v+w degree " + std::to_string(deg) + " at x^" + std::to_string(power));
        auto& g = groups[key];
        g.key = key;
        g.r = deg / 2;
        g.members[{m[L], m[M], m[N]}] += c;
    }
    std::vector<GenericGroup> out;
    for (auto& [k, g] : groups) {
        std::erase_if(g.members, [](const auto& kv) { return kv.second.is_zero(); });
        if (!g.members.empty()) out.push_back(std::move(g));
    }
    return out;
}

FilterResult filter_series(const XSeries& series) {
    FilterResult out{XSeries(series.order()), 0, 0};
    for (int k = 0; k <= series.order(); ++k) {
        CycloNum sum;
        for (const auto& g : group_terms(series[k], k)) {
            if (!g.members.contains({0, 0, 0})) {
                ++out.dropped;
                continue;
            }
            ++out.kept;
            for (const auto& [lmn, c] : g.members) sum += c;
        }
        out.series[k] = TaggedPoly(sum);
    }
    return out;
}

XSeries apply_actions(const XSeries& series) { return filter_series(series).series; }

CycloNum filter_graph_sum(const TaggedPoly& total) {
    using enum TagMonomial::Var;
    if (total.is_zero()) return CycloNum();
    const auto& m = total.terms().begin()->first;
    int deg = m[U] + m[V] + m[W];
    if (deg % 2 != 0) throw IntegrityError("odd u+v+w degree " + std::to_string(deg));
    XSeries s(deg / 2);
    s[deg / 2] = total;
    return filter_series(s).series[deg / 2].constant();
}

std::vector<SeriesRow> extract_gr(const XSeries& filtered) {
    std::vector<SeriesRow> rows;
    for (int k = 0; k <= filtered.order(); ++k) {
        const auto& p = filtered[k];
        if (p.size() > 1 || (p.size() == 1 && !(p.terms().begin()->first == TagMonomial::one())))
            throw std::invalid_argument("extract_gr: coefficient still carries tags");
        SeriesRow row;
        row.r = k;
        CycloNum c = p.constant();
        row.filter_rational = c.is_rational();
        row.filter = c[0];
        row.anomaly = !row.filter_rational || (k % 2 == 1 && !c.is_zero());
        rows.push_back(row);
    }
    return rows;
}

bool SeriesReport::all_agree() const {
    for (const auto& r : rows)
        if ((r.oracle && !r.agree) || (r.ht && !r.agree_ht) || r.anomaly) return false;
    return true;
}

SeriesReport compare_with_oracle(std::vector<SeriesRow> rows, const std::map<int, mpq_class>& oracle,
                                 const std::map<int, mpq_class>& ht) {
    SeriesReport rep;
    for (auto& row : rows) {
        row.oracle.reset();
        row.ht.reset();
        if (auto it = oracle.find(row.r); it != oracle.end()) row.oracle = it->second;
        if (auto it = ht.find(row.r); it != ht.end()) row.ht = it->second;
        row.agree = row.oracle && row.filter_rational && row.filter == *row.oracle;
        row.agree_ht = row.ht && row.filter_rational && row.filter == *row.ht;
    }
    rep.rows = std::move(rows);
    if (!rep.rows.empty()) rep.order = rep.rows.back().r;
    return rep;
}

ScSeriesRun run_sc_series(int order, const ScSeriesOptions& opt) {
    check_order(order, opt);
    TaggedPsi psi = symbolic_psi_sc();
    if (opt.naive) psi.psi = naive_reduce(psi).psi;
    const int L = order + 1;
    const int r_oracle = std::min(order, opt.oracle_order);

    auto finish = [&](const XSeries& projected, const std::string& source) {
        SeriesReport rep;
        if (opt.naive) {
            rep.rows = extract_gr(projected);
        } else {
            auto f = filter_series(projected);
            rep.rows = extract_gr(f.series);
            rep.groups_kept = f.kept;
            rep.groups_dropped = f.dropped;
        }
        rep.source = source;
        rep.order = order;
        rep.naive = opt.naive;
        return rep;
    };

    ScSeriesRun run;
    {
        auto proj = project_mode_sum(expand_sqrt(psi, order, opt), L);
        auto rep = finish(proj, "sqrt");
        std::map<int, mpq_class> oracle;
        auto pc = per_site_connected(LatticeKind::SC, r_oracle);
        for (int r = 1; r <= r_oracle; ++r) oracle[r] = mpq_class(pc.rooted_min[r]);  // no empty connected graph
        auto cmp = compare_with_oracle(rep.rows, oracle);
        rep.rows = cmp.rows;
        rep.window = "SC open box of side " + std::to_string(r_oracle + 1) + ", connected graphs rooted at their least site";
        rep.normalization = "zero Fourier mode of Psi^(1/2), compared per site";
        run.sqrt_report = rep;
    }
    {
        auto lg = expand_log(psi, order, opt).scaled(mpq_class(1, 2));
        auto rep = finish(lg, "log");
        std::map<int, mpq_class> oracle;
        auto ls = per_site_log_series(LatticeKind::SC, r_oracle);
        for (int r = 0; r <= r_oracle; ++r) oracle[r] = ls[r];
        auto cmp = compare_with_oracle(rep.rows, oracle);
        rep.rows = cmp.rows;
        rep.window = "SC torus of side " + std::to_string(r_oracle + 1);
        rep.normalization = "(1/2) zero Fourier mode of log Psi, i.e. (1/N) log S";
        run.log_report = rep;
    }
    return run;
}

}  // namespace isingloop
