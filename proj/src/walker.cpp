#include "isingloop/walker.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace isingloop {

namespace {

constexpr std::array<std::array<int, 2>, 6> kAngleStep = {{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};

DirectionSet make_printed() {
    DirectionSet ds{WalkMode::Printed, {}};
    const std::array<std::array<int, 2>, 6> step = {{{1, 0}, {0, 1}, {1, -1}, {-1, 0}, {0, -1}, {-1, 1}}};
    for (int i = 0; i < 6; ++i)
        ds.dir[i] = {i + 1, i, step[i], {step[i][0], step[i][1], 0}, TagMonomial::one()};
    return ds;
}

DirectionSet make_planar() {
    DirectionSet ds{WalkMode::Planar, {}};
    for (int i = 0; i < 6; ++i)
        ds.dir[i] = {i + 1, i, kAngleStep[i], {kAngleStep[i][0], kAngleStep[i][1], 0}, TagMonomial::one()};
    return ds;
}

DirectionSet make_sc() {
    using enum TagMonomial::Var;
    DirectionSet ds{WalkMode::TaggedSC, {}};
    const std::array<int, 6> angle = {0, 2, 4, 3, 5, 1};
    const std::array<TagMonomial::Var, 3> unsigned_tag = {U, V, W};
    const std::array<TagMonomial::Var, 3> signed_tag = {L, M, N};
    for (int i = 0; i < 6; ++i) {
        int axis = i % 3, sign = i < 3 ? 1 : -1;
        std::array<int, 3> shift{0, 0, 0};
        shift[axis] = sign;
        TagMonomial half;
        half[unsigned_tag[axis]] = 1;
        half[signed_tag[axis]] = sign;
        ds.dir[i] = {i + 1, angle[i], kAngleStep[angle[i]], shift, half};
    }
    return ds;
}

TagMonomial square(const TagMonomial& m) { return m * m; }

int hex_norm(int a, int b) { return (std::abs(a) + std::abs(b) + std::abs(a + b)) / 2; }

int mod(int a, int p) { return ((a % p) + p) % p; }

}  // namespace

const DirectionSet& directions(WalkMode mode) {
    static const DirectionSet printed = make_printed(), planar = make_planar(), sc = make_sc();
    switch (mode) {
        case WalkMode::Printed: return printed;
        case WalkMode::Planar: return planar;
        default: return sc;
    }
}

int turn_units(const DirectionSet& ds, int prev, int next) {
    int t = mod(ds(next).angle - ds(prev).angle, 6);
    return t > 3 ? t - 6 : t;
}

namespace {

PropagatorMatrix build_from(const DirectionSet& ds) {
    PropagatorMatrix p{ds.mode, false, OmegaMatrix::Constant(TaggedPoly())};
    for (int row = 1; row <= 6; ++row)
        for (int col = 1; col <= 6; ++col) {
            int t = turn_units(ds, col, row);
            if (t == 3) continue;
            p.omega(row - 1, col - 1) = TaggedPoly(ds(row).half_tag * ds(col).half_tag, cyclo_pow(t));
        }
    return p;
}

}  // namespace

PropagatorMatrix build_pt_propagator(WalkMode layout) {
    if (layout == WalkMode::TaggedSC) throw std::invalid_argument("build_pt_propagator: not a plane layout");
    return build_from(directions(layout));
}

PropagatorMatrix build_sc_propagator() { return build_from(directions(WalkMode::TaggedSC)); }

PropagatorMatrix fourier_matrix(const PropagatorMatrix& prop) {
    if (prop.fourier) throw std::invalid_argument("fourier_matrix: already transformed");
    const DirectionSet& ds = directions(prop.mode);
    PropagatorMatrix f = prop;
    f.fourier = true;
    for (int col = 1; col <= 6; ++col) {
        TagMonomial sym;
        for (int d = 0; d < 3; ++d) sym.e[TagMonomial::P + d] = -ds(col).shift[d];
        TaggedPoly factor(sym);
        for (int row = 0; row < 6; ++row) f.omega(row, col - 1) = f.omega(row, col - 1) * factor;
    }
    return f;
}

TraceResult trace_power(const PropagatorMatrix& prop, int r) {
    if (r < 1) throw std::invalid_argument("trace_power: r must be >= 1");
    OmegaMatrix m = prop.omega;
    for (int i = 1; i < r; ++i) {
        OmegaMatrix next = m * prop.omega;
        m = next;
    }
    return {m.trace(), mpq_class(1, 2 * r)};
}

LoopWalk make_loop(const DirectionSet& ds, const std::vector<int>& dirs, std::array<int, 2> base) {
    LoopWalk w;
    w.base = base;
    w.dirs = dirs;
    const int r = static_cast<int>(dirs.size());
    for (int i = 0; i < r; ++i) {
        w.rotation += turn_units(ds, dirs[i], dirs[(i + 1) % r]);
        w.tag = w.tag * square(ds(dirs[i]).half_tag);
    }
    w.phase = cyclo_pow(w.rotation);
    return w;
}

int count_self_intersections(const DirectionSet& ds, const LoopWalk& walk, std::uint64_t seed) {
    if (ds.mode == WalkMode::Printed)
        throw std::invalid_argument("count_self_intersections: printed layout has no consistent embedding");
    const int r = static_cast<int>(walk.dirs.size());
    if (r < 4) return 0;
    const std::int64_t S = 1 << 20, jitter = S / 64;
    std::vector<std::array<std::int64_t, 2>> base(r);
    std::array<std::int64_t, 2> pos{walk.base[0], walk.base[1]};
    for (int i = 0; i < r; ++i) {
        base[i] = {pos[0] * S, pos[1] * S};
        pos[0] += ds(walk.dirs[i]).plane[0];
        pos[1] += ds(walk.dirs[i]).plane[1];
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> off(-jitter, jitter);
    auto orient = [](const auto& a, const auto& b, const auto& c) {
        std::int64_t v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        return (v > 0) - (v < 0);
    };
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<std::array<std::int64_t, 2>> P(r);
        for (int i = 0; i < r; ++i) P[i] = {base[i][0] + off(rng), base[i][1] + off(rng)};
        int crossings = 0;
        bool degenerate = false;
        for (int i = 0; i < r && !degenerate; ++i)
            for (int j = i + 2; j < r; ++j) {
                if (i == 0 && j == r - 1) continue;
                const auto &a = P[i], &b = P[(i + 1) % r], &c = P[j], &d = P[(j + 1) % r];
                int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
                if (o1 == 0 || o2 == 0 || o3 == 0 || o4 == 0) {
                    degenerate = true;
                    break;
                }
                if (o1 != o2 && o3 != o4) ++crossings;
            }
        if (!degenerate) return crossings;
    }
    throw std::runtime_error("count_self_intersections: no generic perturbation found");
}

bool whitney_check(const LoopWalk& walk) {
    if (walk.rotation % 6 != 0) return false;
    int nu = walk.self_intersections;
    if (nu < 0) return false;
    int w = walk.rotation / 6;
    bool parity_ok = ((w - 1 - nu) % 2 + 2) % 2 == 0;
    bool phase_ok = walk.phase == CycloNum(nu % 2 == 0 ? -1 : 1);
    return parity_ok && phase_ok;
}

namespace {

std::vector<int> reversed_dirs(const std::vector<int>& d) {
    std::vector<int> r(d.rbegin(), d.rend());
    for (int& v : r) v = reverse_dir(v);
    return r;
}

std::vector<int> min_rotation(const std::vector<int>& d) {
    std::vector<int> best = d, cur = d;
    for (std::size_t i = 1; i < d.size(); ++i) {
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        if (cur < best) best = cur;
    }
    return best;
}

}  // namespace

std::vector<LoopWalk> enumerate_loops(const LoopLattice& lattice, int max_len, const EnumerateOptions& opt) {
    if (max_len > opt.max_len_bound)
        throw std::invalid_argument("enumerate_loops: max_len exceeds configured bound");
    const DirectionSet& ds = directions(lattice.mode);
    const int P = lattice.period;
    std::vector<LoopWalk> out;
    std::set<std::vector<int>> seen;
    std::uint64_t nodes = 0;
    std::vector<int> dirs;
    std::array<int, 2> pos{0, 0};

    auto closed = [&](const std::array<int, 2>& p) {
        return P > 0 ? mod(p[0], P) == 0 && mod(p[1], P) == 0 : p[0] == 0 && p[1] == 0;
    };

    auto emit = [&]() {
        if (turn_units(ds, dirs.back(), dirs.front()) == 3) return;
        if (opt.dedup != Dedup::None) {
            std::vector<int> key = min_rotation(dirs);
            if (opt.dedup == Dedup::Reversal) key = std::min(key, min_rotation(reversed_dirs(dirs)));
            if (!seen.insert(key).second) return;
        }
        LoopWalk w = make_loop(ds, dirs);
        if (opt.count_crossings && lattice.mode != WalkMode::Printed && P == 0)
            w.self_intersections = count_self_intersections(ds, w);
        out.push_back(std::move(w));
    };

    auto dfs = [&](auto&& self) -> void {
        if (++nodes > opt.node_budget) throw ResourceLimit("enumerate_loops: node budget exceeded");
        int depth = static_cast<int>(dirs.size());
        if (depth > 0 && closed(pos)) emit();
        if (depth == max_len) return;
        for (int nu = 1; nu <= 6; ++nu) {
            if (depth > 0 && nu == reverse_dir(dirs.back())) continue;
            std::array<int, 2> next{pos[0] + ds(nu).plane[0], pos[1] + ds(nu).plane[1]};
            if (P == 0 && hex_norm(next[0], next[1]) > max_len - depth - 1) continue;
            dirs.push_back(nu);
            auto saved = pos;
            pos = next;
            self(self);
            pos = saved;
            dirs.pop_back();
        }
    };
    dfs(dfs);
    return out;
}

LoopGraph LoopGraph::from_steps(WalkMode mode, const std::vector<int>& steps, std::array<int, 2> start) {
    const DirectionSet& ds = directions(mode);
    LoopGraph g{mode, {}};
    auto pos = start;
    for (int nu : steps) {
        g.edges.push_back({pos, nu});
        pos[0] += ds(nu).plane[0];
        pos[1] += ds(nu).plane[1];
    }
    return g;
}

namespace {

using Point = std::array<int, 2>;
using Step = std::array<int, 3>;  // x, y, nu

struct HalfEdge {
    int edge;
    bool tail;
};

void all_matchings(const std::vector<int>& items, const std::vector<int>& out_angle, std::vector<std::pair<int, int>>& cur,
                   std::vector<int>& used, std::vector<std::vector<std::pair<int, int>>>& result) {
    int first = -1;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (!used[i]) {
            first = static_cast<int>(i);
            break;
        }
    if (first < 0) {
        result.push_back(cur);
        return;
    }
    used[first] = 1;
    for (std::size_t j = first + 1; j < items.size(); ++j) {
        if (used[j] || out_angle[first] == out_angle[j]) continue;
        used[j] = 1;
        cur.emplace_back(items[first], items[j]);
        all_matchings(items, out_angle, cur, used, result);
        cur.pop_back();
        used[j] = 0;
    }
    used[first] = 0;
}

std::vector<Step> canonical_loop(const DirectionSet& ds, const std::vector<Step>& steps) {
    std::vector<Step> rev;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        const auto& s = *it;
        rev.push_back({s[0] + ds(s[2]).plane[0], s[1] + ds(s[2]).plane[1], reverse_dir(s[2])});
    }
    std::vector<Step> best = steps;
    for (const std::vector<Step>* seq : std::array<const std::vector<Step>*, 2>{&steps, &rev}) {
        std::vector<Step> cur = *seq;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (cur < best) best = cur;
            std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        }
    }
    return best;
}

}  // namespace

GraphLoopSum graph_loop_sum(const LoopGraph& graph) {
    const DirectionSet& ds = directions(graph.mode);
    const int E = static_cast<int>(graph.edges.size());
    std::map<Point, std::vector<int>> at;  // vertex -> half-edge ids (2e tail, 2e+1 head)
    auto head = [&](int e) {
        const auto& ed = graph.edges[e];
        return Point{ed.from[0] + ds(ed.nu).plane[0], ed.from[1] + ds(ed.nu).plane[1]};
    };
    auto out_nu = [&](int h) { return h % 2 == 0 ? graph.edges[h / 2].nu : reverse_dir(graph.edges[h / 2].nu); };
    for (int e = 0; e < E; ++e) {
        at[graph.edges[e].from].push_back(2 * e);
        at[head(e)].push_back(2 * e + 1);
    }
    std::vector<std::vector<std::vector<std::pair<int, int>>>> options;
    for (const auto& [p, hs] : at) {
        if (hs.size() % 2 != 0) throw NotEvenSubgraph("graph_loop_sum: odd-degree vertex");
        std::vector<int> ang;
        for (int h : hs) ang.push_back(ds(out_nu(h)).angle);
        std::vector<std::vector<std::pair<int, int>>> ms;
        std::vector<std::pair<int, int>> cur;
        std::vector<int> used(hs.size(), 0);
        all_matchings(hs, ang, cur, used, ms);
        options.push_back(std::move(ms));
    }

    GraphLoopSum result;
    std::set<std::vector<std::vector<Step>>> seen;
    std::vector<std::size_t> odo(options.size(), 0);
    for (const auto& o : options)
        if (o.empty()) return result;
    std::vector<int> partner(2 * E, -1);
    while (true) {
        for (std::size_t v = 0; v < options.size(); ++v)
            for (auto [a, b] : options[v][odo[v]]) {
                partner[a] = b;
                partner[b] = a;
            }
        std::vector<char> used(E, 0);
        std::vector<std::vector<Step>> loops;
        std::vector<std::vector<int>> loop_dirs;
        for (int e0 = 0; e0 < E; ++e0) {
            if (used[e0]) continue;
            std::vector<Step> steps;
            std::vector<int> dirs;
            int h = 2 * e0;  // leave along the tail of e0
            do {
                int e = h / 2;
                used[e] = 1;
                bool fwd = h % 2 == 0;
                Point from = fwd ? graph.edges[e].from : head(e);
                int nu = out_nu(h);
                steps.push_back({from[0], from[1], nu});
                dirs.push_back(nu);
                int arrive = fwd ? 2 * e + 1 : 2 * e;
                h = partner[arrive];
            } while (h != 2 * e0);
            loops.push_back(canonical_loop(ds, steps));
            loop_dirs.push_back(std::move(dirs));
        }
        std::vector<std::vector<Step>> key = loops;
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second) {
            LoopTerm t;
            t.loops = loop_dirs;
            t.sign = loop_dirs.size() % 2 == 0 ? 1 : -1;
            int rot = 0;
            for (const auto& d : loop_dirs) {
                LoopWalk w = make_loop(ds, d);
                rot += w.rotation;
                t.tag = t.tag * w.tag;
            }
            t.phase_exponent = mod(rot, 12);
            result.total.add_term(t.tag, t.factor());
            result.terms.push_back(std::move(t));
        }
        std::size_t v = 0;
        while (v < odo.size() && ++odo[v] == options[v].size()) odo[v++] = 0;
        if (v == odo.size()) break;
    }
    return result;
}

std::vector<int> example_steps(int which) {
    // SC labels: 1 +x, 2 +y, 3 +z, 4 -x, 5 -y, 6 -z
    switch (which) {
        case 1: return {1, 2, 3, 4, 5, 6};
        case 2: return {1, 2, 6, 5, 3, 2, 4, 5};
        case 3: return {1, 6, 2, 4, 3, 4, 4, 5, 5, 1, 6};
        default: throw std::invalid_argument("example_steps: 1..3");
    }
}

}  // namespace isingloop
