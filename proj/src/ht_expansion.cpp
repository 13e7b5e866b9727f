#include "isingloop/ht_expansion.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "isingloop/ring.hpp"

namespace isingloop {

WindowLattice WindowLattice::make(LatticeKind kind, int radius) {
    if (kind != LatticeKind::SQ && kind != LatticeKind::SC)
        throw std::invalid_argument("window: only SQ and SC product forms are defined");
    if (radius < 0) throw std::invalid_argument("window: negative radius");
    WindowLattice w{kind, radius, {}};
    const int d = w.dim(), n = 2 * radius + 1;
    int total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    for (int s = 0; s < total; ++s) {
        std::vector<int> o(d);
        for (int i = d - 1, t = s; i >= 0; --i, t /= n) o[i] = t % n - radius;
        w.offsets.push_back(o);
    }
    auto l1 = [](const std::vector<int>& o) {
        int a = 0;
        for (int v : o) a += std::abs(v);
        return a;
    };
    std::stable_sort(w.offsets.begin(), w.offsets.end(), [&](const auto& a, const auto& b) { return l1(a) < l1(b); });
    w.box_to_site.assign(total, 0);
    for (int s = 0; s < total; ++s) {
        int idx = 0;
        for (int v : w.offsets[s]) idx = idx * n + (v + radius);
        w.box_to_site[idx] = s;
    }
    return w;
}

std::optional<int> WindowLattice::site(const std::vector<int>& offset) const {
    int idx = 0;
    for (int v : offset) {
        if (std::abs(v) > radius) return std::nullopt;
        idx = idx * (2 * radius + 1) + (v + radius);
    }
    return box_to_site[idx];
}

LatticeSpec WindowLattice::as_lattice(int& center_index) const {
    auto l = LatticeSpec::make(kind, std::vector<int>(dim(), 2 * radius + 1), false);
    center_index = *l.index(std::vector<int>(dim(), radius));
    return l;
}

ProductTerms build_product_terms(const WindowLattice& window, bool bond_dedup) {
    ProductTerms out;
    const int d = window.dim(), L = 2 * window.radius;
    // per family: axis, step sign, and the printed index ranges [0, hi_k] per coordinate
    struct Family {
        char name;
        int axis, step;
        std::vector<int> hi;
    };
    std::vector<Family> fams;
    if (d == 2) {
        fams = {{'A', 1, +1, {L, L - 1}}, {'B', 1, -1, {L, L + 1}}, {'C', 0, +1, {L - 1, L}}, {'D', 0, -1, {L + 1, L}}};
    } else {
        fams = {{'A', 0, +1, {L - 1, L, L}}, {'B', 1, +1, {L, L - 1, L}}, {'C', 2, +1, {L, L, L - 1}},
                {'D', 0, -1, {L + 1, L, L}}, {'E', 1, -1, {L, L + 1, L}}, {'F', 2, -1, {L, L, L + 1}}};
    }
    std::map<std::pair<int, int>, int> seen;
    for (const auto& f : fams) {
        int raw = 1;
        for (int h : f.hi) raw *= std::max(0, h + 1);
        out.raw_per_family.push_back(raw);
        if (raw == 0) continue;
        std::vector<int> idx(d, 0);
        for (int t = 0; t < raw; ++t) {
            for (int i = d - 1, r = t; i >= 0; --i) {
                idx[i] = r % (f.hi[i] + 1);
                r /= f.hi[i] + 1;
            }
            std::vector<int> from(d), to(d);
            for (int i = 0; i < d; ++i) from[i] = idx[i] - window.radius;
            to = from;
            to[f.axis] += f.step;
            auto a = window.site(from), b = window.site(to);
            if (!a || !b) {
                ++out.clipped;
                continue;
            }
            auto key = std::minmax(*a, *b);
            if (bond_dedup && seen[key]++) {
                ++out.merged;
                continue;
            }
            out.factors.push_back({*a, *b, f.name});
        }
    }
    return out;
}

namespace {

using Coef = __int128;

struct StateKey {
    std::vector<int> odd;
    bool touched = false;
    bool operator==(const StateKey&) const = default;
};

struct KeyHash {
    std::size_t operator()(const StateKey& k) const {
        std::size_t h = k.touched ? 0x9e3779b97f4a7c15ull : 0;
        for (int v : k.odd) h = (h ^ std::size_t(v)) * 0x100000001b3ull + (h >> 29);
        return h;
    }
};

using StateMap = std::unordered_map<StateKey, std::vector<Coef>, KeyHash>;

void add_into(std::vector<Coef>& dst, const std::vector<Coef>& src) {
    for (std::size_t k = 0; k < src.size(); ++k)
        if (__builtin_add_overflow(dst[k], src[k], &dst[k])) throw std::overflow_error("expansion coefficient overflow");
}

mpz_class to_mpz(Coef c) {
    bool neg = c < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(c) : c;
    mpz_class hi(static_cast<unsigned long>(u >> 64)), lo(static_cast<unsigned long>(u & ~0ull));
    mpz_class r = (hi << 64) + lo;
    return neg ? mpz_class(-r) : r;
}

std::vector<SpinMonomial> expand_once(std::vector<BondFactor> factors, int order, const ExpandOptions& opt) {
    int nsite = 0;
    for (const auto& f : factors) nsite = std::max({nsite, f.a + 1, f.b + 1});
    if (opt.require_center) nsite = std::max(nsite, opt.center + 1);
    if (opt.prune_odd)
        std::stable_sort(factors.begin(), factors.end(), [](const BondFactor& x, const BondFactor& y) {
            return std::pair(std::max(x.a, x.b), std::min(x.a, x.b)) < std::pair(std::max(y.a, y.b), std::min(y.a, y.b));
        });
    std::vector<int> last(nsite, -1);
    for (int i = 0; i < int(factors.size()); ++i) last[factors[i].a] = last[factors[i].b] = i;
    std::vector<std::vector<int>> retire(factors.size());
    for (int s = 0; s < nsite; ++s)
        if (last[s] >= 0) retire[last[s]].push_back(s);

    StateMap states;
    std::vector<Coef> one(order + 1, 0);
    one[0] = 1;
    states[{}] = one;
    const bool center_has_factors = opt.require_center && last[opt.center] >= 0;
    if (opt.require_center && !center_has_factors) return {};

    for (int i = 0; i < int(factors.size()); ++i) {
        const auto& f = factors[i];
        bool boundary = i + 1 == int(factors.size()) ||
                        std::max(factors[i + 1].a, factors[i + 1].b) != std::max(f.a, f.b);
        // fewest further bonds that can make every odd site even
        auto need = [&](std::size_t p) -> int {
            if (!opt.prune_odd) return 0;
            int base = int(p + 1) / 2;
            return std::max(base, int(p) - (boundary ? 0 : 1));
        };
        std::vector<std::pair<StateKey, std::vector<Coef>>> fresh;
        for (const auto& [key, poly] : states) {
            StateKey nk = key;
            for (int v : {f.a, f.b}) {
                auto it = std::lower_bound(nk.odd.begin(), nk.odd.end(), v);
                if (it != nk.odd.end() && *it == v) nk.odd.erase(it);
                else nk.odd.insert(it, v);
            }
            if (opt.require_center && (f.a == opt.center || f.b == opt.center)) nk.touched = true;
            bool drop = false;
            if (opt.prune_odd)
                for (int s : retire[i])
                    if (std::binary_search(nk.odd.begin(), nk.odd.end(), s)) drop = true;
            if (drop) continue;
            int lim = order - need(nk.odd.size());
            std::vector<Coef> shifted(order + 1, 0);
            bool any = false;
            for (int k = 0; k < order && k + 1 <= lim; ++k)
                if (poly[k]) {
                    shifted[k + 1] = poly[k];
                    any = true;
                }
            if (any) fresh.emplace_back(std::move(nk), std::move(shifted));
        }
        // the "1" branch keeps every state; retire finished sites and re-apply the order bound
        for (auto it = states.begin(); it != states.end();) {
            bool drop = false;
            if (opt.prune_odd)
                for (int s : retire[i])
                    if (std::binary_search(it->first.odd.begin(), it->first.odd.end(), s)) drop = true;
            if (drop) {
                it = states.erase(it);
                continue;
            }
            ++it;
        }
        for (auto& [k, p] : fresh) {
            auto [it, inserted] = states.try_emplace(std::move(k), std::vector<Coef>(order + 1, 0));
            add_into(it->second, p);
        }
        if (opt.prune_odd)
            for (auto it = states.begin(); it != states.end();) {
                int lim = order - need(it->first.odd.size());
                bool any = false;
                for (int k = 0; k <= order; ++k) {
                    if (k > lim) it->second[k] = 0;
                    any = any || it->second[k];
                }
                if (!any) it = states.erase(it);
                else ++it;
            }
        if (center_has_factors && last[opt.center] == i)
            for (auto it = states.begin(); it != states.end();)
                it = it->first.touched ? std::next(it) : states.erase(it);
        if (states.size() > opt.term_budget) throw BudgetExceeded(-1, "expand_and_reduce: term budget exceeded");
    }

    std::vector<SpinMonomial> out;
    for (const auto& [key, poly] : states) {
        if (opt.require_center && !key.touched) continue;
        for (int k = 0; k <= order; ++k)
            if (poly[k]) out.push_back({key.odd, k, to_mpz(poly[k])});
    }
    std::sort(out.begin(), out.end(), [](const SpinMonomial& a, const SpinMonomial& b) {
        return std::tie(a.power, a.odd) < std::tie(b.power, b.odd);
    });
    return out;
}

}  // namespace

std::vector<SpinMonomial> expand_and_reduce(const std::vector<BondFactor>& factors, int order,
                                            const ExpandOptions& opt) {
    if (order < 0) throw std::invalid_argument("expand_and_reduce: negative order");
    try {
        return expand_once(factors, order, opt);
    } catch (const BudgetExceeded&) {
        int reached = -1;
        for (int r = order - 1; r >= 0; --r) {
            try {
                expand_once(factors, r, opt);
                reached = r;
                break;
            } catch (const BudgetExceeded&) {
            }
        }
        throw BudgetExceeded(reached, "expand_and_reduce: term budget exceeded");
    }
}

std::vector<mpz_class> sum_over_configurations(const std::vector<SpinMonomial>& monomials, int order) {
    std::vector<mpz_class> g(order + 1, 0);
    for (const auto& m : monomials)
        if (m.odd.empty() && m.power <= order) g[m.power] += m.coeff;
    return g;
}

IntPoly full_partition_polynomial(const LatticeSpec& lattice, std::size_t term_budget) {
    std::vector<BondFactor> factors;
    for (const auto& b : lattice.bonds) factors.push_back({b.a, b.b, 'A'});
    ExpandOptions opt;
    opt.prune_odd = true;
    opt.term_budget = term_budget;
    const int order = int(factors.size());
    return sum_over_configurations(expand_and_reduce(factors, order, opt), order);
}

int default_window_radius(int order) { return (order + 1) / 2 + 1; }

WindowSeries window_series(LatticeKind kind, int order, int radius, bool through_center, bool bond_dedup) {
    if (radius < 0) radius = default_window_radius(order);
    auto window = WindowLattice::make(kind, radius);
    auto terms = build_product_terms(window, bond_dedup);
    ExpandOptions opt;
    opt.require_center = through_center;
    opt.center = window.center();
    opt.prune_odd = true;
    WindowSeries out{kind, order, radius, through_center, bond_dedup, {}};
    out.g = sum_over_configurations(expand_and_reduce(terms.factors, order, opt), order);
    return out;
}

}  // namespace isingloop
