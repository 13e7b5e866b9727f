#include "isingloop/oracle.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <optional>
#include <set>

namespace isingloop {

std::vector<std::vector<int>> LatticeSpec::forward_steps(LatticeKind kind) {
    switch (kind) {
        case LatticeKind::Chain: return {{1}};
        case LatticeKind::SQ: return {{1, 0}, {0, 1}};
        case LatticeKind::PT: return {{1, 0}, {0, 1}, {-1, 1}};
        case LatticeKind::SC: return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    }
    return {};
}

LatticeSpec LatticeSpec::make(LatticeKind kind, std::vector<int> sides, bool periodic) {
    auto steps = forward_steps(kind);
    if (sides.size() != steps[0].size()) throw std::invalid_argument("lattice: wrong number of sides");
    for (int s : sides)
        if (s < 1 || (periodic && s < 2)) throw std::invalid_argument("lattice: side too small");
    LatticeSpec l{kind, std::move(sides), periodic, {}};
    for (int s = 0; s < l.sites(); ++s) {
        auto c = l.coords(s);
        for (int a = 0; a < int(steps.size()); ++a) {
            auto d = c;
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += steps[a][i];
            if (auto t = l.index(d)) l.bonds.push_back({s, *t, a});
        }
    }
    return l;
}

int LatticeSpec::sites() const { return std::accumulate(sides.begin(), sides.end(), 1, std::multiplies<>()); }

int LatticeSpec::coordination() const { return 2 * int(forward_steps(kind).size()); }

std::vector<int> LatticeSpec::coords(int site) const {
    std::vector<int> c(sides.size());
    for (int i = int(sides.size()) - 1; i >= 0; --i) {
        c[i] = site % sides[i];
        site /= sides[i];
    }
    return c;
}

std::optional<int> LatticeSpec::index(std::vector<int> c) const {
    int idx = 0;
    for (std::size_t i = 0; i < sides.size(); ++i) {
        int v = c[i];
        if (periodic) v = ((v % sides[i]) + sides[i]) % sides[i];
        else if (v < 0 || v >= sides[i]) return std::nullopt;
        idx = idx * sides[i] + v;
    }
    return idx;
}

IntPoly exhaustive_partition(const LatticeSpec& lattice) {
    const int n = lattice.sites(), nb = int(lattice.bonds.size());
    if (n > kMaxExhaustiveSites) throw LatticeTooLarge("exhaustive_partition: more than 27 sites");
    std::vector<std::vector<int>> nbr(n);
    for (const auto& b : lattice.bonds) {
        nbr[b.a].push_back(b.b);
        nbr[b.b].push_back(b.a);
    }
    // Gray-code walk over configurations with the last spin fixed; global flip doubles each count.
    std::vector<std::uint64_t> hist(nb + 1, 0);
    std::vector<int> spin(n, 1);
    int disagree = 0;
    hist[0] = 1;
    const std::uint64_t count = n > 1 ? std::uint64_t(1) << (n - 1) : 1;
    for (std::uint64_t k = 1; k < count; ++k) {
        int i = std::countr_zero(k);
        for (int j : nbr[i]) disagree += spin[i] == spin[j] ? 1 : -1;
        spin[i] = -spin[i];
        ++hist[disagree];
    }
    IntPoly acc(nb + 1);
    for (int d = 0; d <= nb; ++d) {
        if (!hist[d]) continue;
        // (1+x)^(nb-d) (1-x)^d
        std::vector<mpz_class> p(nb + 1);
        p[0] = 1;
        int deg = 0;
        for (int t = 0; t < nb; ++t) {
            int sgn = t < d ? -1 : 1;
            for (int i = deg + 1; i > 0; --i) p[i] += sgn * p[i - 1];
            ++deg;
        }
        mpz_class h(static_cast<unsigned long>(hist[d]));
        for (int i = 0; i <= nb; ++i) acc[i] += h * p[i];
    }
    const mpz_class denom = mpz_class(static_cast<unsigned long>(count));
    for (auto& c : acc) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), denom.get_mpz_t());
    return acc;
}

namespace {

struct BudgetHit {};

struct EdgeGraph {
    int nv = 0;
    std::vector<std::array<int, 2>> ends;
    std::vector<std::vector<int>> inc;

    explicit EdgeGraph(const LatticeSpec& l) : nv(l.sites()), inc(l.sites()) {
        for (const auto& b : l.bonds) {
            inc[b.a].push_back(int(ends.size()));
            inc[b.b].push_back(int(ends.size()));
            ends.push_back({b.a, b.b});
        }
    }
};

// Redelmeier-style enumeration of connected bond sets touching `root` (each exactly once),
// restricted to allowed vertices, reporting the even ones.
class EvenEnumerator {
public:
    using Visit = std::function<void(const std::vector<int>& edges, int nverts)>;

    EvenEnumerator(const EdgeGraph& g, int r_max, std::uint64_t budget)
        : g_(g), r_max_(r_max), budget_(budget), marked_(g.ends.size(), 0), deg_(g.nv, 0) {}

    void run(int root, const std::function<bool(int)>& allowed, const Visit& visit) {
        allowed_ = &allowed;
        visit_ = &visit;
        std::vector<int> untried;
        for (int e : g_.inc[root]) {
            if (marked_[e]) continue;
            int w = other(e, root);
            if (!allowed(w)) continue;
            marked_[e] = 1;
            untried.push_back(e);
        }
        grow(untried);
        for (int e : untried) marked_[e] = 0;
    }

    std::uint64_t nodes() const { return nodes_; }

private:
    int other(int e, int v) const { return g_.ends[e][0] == v ? g_.ends[e][1] : g_.ends[e][0]; }

    void bump(int v, int d) {
        if (deg_[v] == 0) ++nverts_;
        deg_[v] += d;
        if (deg_[v] == 0) --nverts_;
        odd_ += (deg_[v] & 1) ? 1 : -1;
    }

    void grow(std::vector<int> untried) {
        while (!untried.empty()) {
            if (++nodes_ > budget_) throw BudgetHit{};
            int e = untried.back();
            untried.pop_back();
            cur_.push_back(e);
            bump(g_.ends[e][0], 1);
            bump(g_.ends[e][1], 1);
            int left = r_max_ - int(cur_.size());
            if (odd_ <= 2 * left) {
                if (odd_ == 0) (*visit_)(cur_, nverts_);
                if (left > 0) {
                    std::vector<int> fresh;
                    for (int v : g_.ends[e])
                        for (int f : g_.inc[v]) {
                            if (marked_[f] || !(*allowed_)(other(f, v))) continue;
                            marked_[f] = 1;
                            fresh.push_back(f);
                        }
                    auto next = untried;
                    next.insert(next.end(), fresh.begin(), fresh.end());
                    grow(std::move(next));
                    for (int f : fresh) marked_[f] = 0;
                }
            }
            bump(g_.ends[e][0], -1);
            bump(g_.ends[e][1], -1);
            cur_.pop_back();
        }
    }

    const EdgeGraph& g_;
    int r_max_;
    std::uint64_t budget_, nodes_ = 0;
    std::vector<char> marked_;
    std::vector<int> deg_;
    int odd_ = 0, nverts_ = 0;
    std::vector<int> cur_;
    const std::function<bool(int)>* allowed_ = nullptr;
    const Visit* visit_ = nullptr;
};

// All connected even bond sets with at most r_max bonds, as sorted bond lists:
// simple cycles first (each rooted at its smallest vertex), then edge-disjoint unions of
// cycles sharing a vertex, deduplicated by their bond set.
std::vector<std::vector<int>> connected_even_sets(const EdgeGraph& g, int r_max, std::uint64_t budget,
                                                  const std::function<bool(int)>& keep_root) {
    std::uint64_t ops = 0;
    auto tick = [&] {
        if (++ops > budget) throw BudgetHit{};
    };
    std::vector<std::vector<int>> cycles;
    std::vector<char> on_path(g.nv, 0);
    std::vector<int> path, dist(g.nv);
    auto other = [&](int e, int v) { return g.ends[e][0] == v ? g.ends[e][1] : g.ends[e][0]; };
    std::function<void(int, int)> walk = [&](int root, int v) {
        for (int e : g.inc[v]) {
            tick();
            if (!path.empty() && e == path.back()) continue;
            int w = other(e, v);
            if (w == root) {
                if (path.empty() || path.front() >= e) continue;
                auto c = path;
                c.push_back(e);
                std::sort(c.begin(), c.end());
                cycles.push_back(std::move(c));
                continue;
            }
            if (w < root || on_path[w] || int(path.size()) + 1 + dist[w] > r_max) continue;
            on_path[w] = 1;
            path.push_back(e);
            walk(root, w);
            path.pop_back();
            on_path[w] = 0;
        }
    };
    for (int v = 0; v < g.nv; ++v) {
        if (!keep_root(v)) continue;
        // hop distance back to the root bounds the remaining cycle length
        std::fill(dist.begin(), dist.end(), r_max + 1);
        std::vector<int> queue = {v};
        dist[v] = 0;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            int u = queue[h];
            if (dist[u] >= r_max / 2) continue;
            for (int e : g.inc[u]) {
                int w = other(e, u);
                if (dist[w] > dist[u] + 1) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        on_path[v] = 1;
        walk(v, v);
        on_path[v] = 0;
    }

    std::vector<std::vector<int>> by_vertex(g.nv);
    for (int i = 0; i < int(cycles.size()); ++i)
        for (int e : cycles[i])
            for (int v : g.ends[e])
                if (by_vertex[v].empty() || by_vertex[v].back() != i) by_vertex[v].push_back(i);
    for (auto& list : by_vertex)
        std::stable_sort(list.begin(), list.end(), [&](int a, int b) { return cycles[a].size() < cycles[b].size(); });

    std::set<std::vector<int>> seen(cycles.begin(), cycles.end());
    std::vector<std::vector<int>> out(cycles.begin(), cycles.end());
    for (std::size_t head = 0; head < out.size(); ++head) {
        const std::vector<int> cur = out[head];
        std::set<int> verts;
        for (int e : cur) verts.insert(g.ends[e].begin(), g.ends[e].end());
        for (int v : verts)
            for (int ci : by_vertex[v]) {
                tick();
                const auto& c = cycles[ci];
                if (cur.size() + c.size() > std::size_t(r_max)) break;
                std::vector<int> merged;
                std::set_union(cur.begin(), cur.end(), c.begin(), c.end(), std::back_inserter(merged));
                if (merged.size() != cur.size() + c.size()) continue;
                if (seen.insert(merged).second) out.push_back(std::move(merged));
            }
    }
    return out;
}

struct Component {
    int size;
    std::vector<int> verts;
    bool through;
};

// Every even subgraph as a sum of fundamental cycles, visited in Gray-code order.
constexpr int kMaxCycleRank = 20;

std::optional<EvenCounts> count_by_cycle_space(const LatticeSpec& lattice, int r_max, const CountOptions& opt) {
    EdgeGraph g(lattice);
    int ne = int(g.ends.size());
    if (ne > 64) return std::nullopt;
    // spanning forest by BFS
    std::vector<int> parent_edge(g.nv, -1), depth(g.nv, -1);
    int components = 0;
    for (int root = 0; root < g.nv; ++root) {
        if (depth[root] >= 0) continue;
        ++components;
        depth[root] = 0;
        std::vector<int> queue{root};
        for (std::size_t i = 0; i < queue.size(); ++i) {
            int v = queue[i];
            for (int e : g.inc[v]) {
                int w = g.ends[e][0] == v ? g.ends[e][1] : g.ends[e][0];
                if (depth[w] >= 0) continue;
                depth[w] = depth[v] + 1;
                parent_edge[w] = e;
                queue.push_back(w);
            }
        }
    }
    int rank = ne - g.nv + components;
    if (rank > kMaxCycleRank) return std::nullopt;
    std::vector<char> tree(ne, 0);
    for (int e : parent_edge)
        if (e >= 0) tree[e] = 1;
    auto up = [&](int v) { return g.ends[parent_edge[v]][0] == v ? g.ends[parent_edge[v]][1] : g.ends[parent_edge[v]][0]; };
    std::vector<std::uint64_t> basis;
    for (int e = 0; e < ne; ++e) {
        if (tree[e]) continue;
        std::uint64_t c = std::uint64_t(1) << e;
        int a = g.ends[e][0], b = g.ends[e][1];
        while (a != b) {
            if (depth[a] < depth[b]) std::swap(a, b);
            c ^= std::uint64_t(1) << parent_edge[a];
            a = up(a);
        }
        basis.push_back(c);
    }

    EvenCounts out;
    out.r_max = out.reached = r_max;
    out.total.assign(r_max + 1, 0);
    out.connected.assign(r_max + 1, 0);
    std::vector<std::uint64_t> total(r_max + 1, 0), connected(r_max + 1, 0);
    std::vector<int> comp(g.nv);
    auto find = [&](int v) {
        while (comp[v] != v) v = comp[v] = comp[comp[v]];
        return v;
    };
    std::uint64_t set = 0;
    for (std::uint64_t k = 0; k < (std::uint64_t(1) << rank); ++k) {
        if (k) set ^= basis[std::countr_zero(k)];
        int r = std::popcount(set);
        if (r > r_max) continue;
        std::iota(comp.begin(), comp.end(), 0);
        int touched = 0, joins = 0;
        bool through = !opt.through;
        std::vector<char> seen(g.nv, 0);
        for (std::uint64_t m = set; m; m &= m - 1) {
            int e = std::countr_zero(m);
            for (int v : g.ends[e]) {
                if (!seen[v]) seen[v] = 1, ++touched;
                if (opt.through && v == *opt.through) through = true;
            }
            int a = find(g.ends[e][0]), b = find(g.ends[e][1]);
            if (a != b) comp[a] = b, ++joins;
        }
        if (!through) continue;
        ++total[r];
        if (r > 0 && joins == touched - 1) ++connected[r];
    }
    for (int r = 0; r <= r_max; ++r) {
        out.total[r] = mpz_class(static_cast<unsigned long>(total[r]));
        out.connected[r] = mpz_class(static_cast<unsigned long>(connected[r]));
    }
    return out;
}

EvenCounts count_once(const LatticeSpec& lattice, int r_max, const CountOptions& opt) {
    EdgeGraph g(lattice);
    std::vector<Component> comps;
    for (const auto& edges : connected_even_sets(g, r_max, opt.node_budget, [](int) { return true; })) {
        std::vector<int> vs;
        for (int e : edges) vs.insert(vs.end(), g.ends[e].begin(), g.ends[e].end());
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
        bool through = opt.through && std::binary_search(vs.begin(), vs.end(), *opt.through);
        comps.push_back({int(edges.size()), std::move(vs), through});
    }
    std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size < b.size; });

    EvenCounts out;
    out.r_max = out.reached = r_max;
    out.total.assign(r_max + 1, 0);
    out.connected.assign(r_max + 1, 0);
    out.total[0] = opt.through ? 0 : 1;
    out.connected[0] = 0;
    for (const auto& c : comps)
        if (!opt.through || c.through) out.connected[c.size] += 1;

    // vertex-disjoint unions, components taken in increasing list order
    std::vector<char> used(g.nv, 0);
    std::vector<std::uint64_t> tally(r_max + 1, 0);
    std::function<void(std::size_t, int, bool)> pick = [&](std::size_t start, int total, bool through) {
        for (std::size_t j = start; j < comps.size(); ++j) {
            const auto& c = comps[j];
            if (total + c.size > r_max) break;
            bool clash = false;
            for (int v : c.verts)
                if (used[v]) {
                    clash = true;
                    break;
                }
            if (clash) continue;
            bool t = through || c.through;
            if (!opt.through || t) ++tally[total + c.size];
            for (int v : c.verts) used[v] = 1;
            pick(j + 1, total + c.size, t);
            for (int v : c.verts) used[v] = 0;
        }
    };
    pick(0, 0, false);
    for (int r = 1; r <= r_max; ++r) out.total[r] += mpz_class(static_cast<unsigned long>(tally[r]));
    return out;
}

std::vector<mpq_class> log_series(const std::vector<mpz_class>& s, int r_max) {
    // S L' = S' with S(0) = 1
    std::vector<mpq_class> a(r_max + 1), l(r_max + 1);
    for (int k = 0; k <= r_max && k < int(s.size()); ++k) a[k] = s[k];
    for (int k = 1; k <= r_max; ++k) {
        mpq_class acc = k * a[k];
        for (int j = 1; j < k; ++j) acc -= j * l[j] * a[k - j];
        l[k] = acc / k;
    }
    return l;
}

LatticeSpec box_around_origin(LatticeKind kind, int r_max, bool periodic, int& center) {
    int dim = int(LatticeSpec::forward_steps(kind)[0].size());
    int side = r_max + 1;
    auto l = LatticeSpec::make(kind, std::vector<int>(dim, side), periodic);
    center = *l.index(std::vector<int>(dim, side / 2));
    return l;
}

}  // namespace

EvenCounts count_even_subgraphs(const LatticeSpec& lattice, int r_max, const CountOptions& opt) {
    if (r_max < 0) throw std::invalid_argument("count_even_subgraphs: negative order");
    if (opt.cycle_space)
        if (auto fast = count_by_cycle_space(lattice, r_max, opt)) return *fast;
    for (int r = r_max; r >= 0; --r) {
        try {
            auto out = count_once(lattice, r, opt);
            if (r < r_max) {
                out.r_max = r_max;
                out.complete = false;
                out.total.resize(r_max + 1);
                out.connected.resize(r_max + 1);
            }
            return out;
        } catch (const BudgetHit&) {
        }
    }
    EvenCounts none;
    none.r_max = r_max;
    none.reached = -1;
    none.complete = false;
    return none;
}

PerSiteCounts per_site_connected(LatticeKind kind, int r_max) {
    int center = 0;
    auto lat = box_around_origin(kind, r_max, false, center);
    EdgeGraph g(lat);
    PerSiteCounts out;
    out.rooted_min.assign(r_max + 1, 0);
    out.weighted.assign(r_max + 1, 0);
    // cycle unions whose smallest vertex is the center
    for (const auto& e : connected_even_sets(g, r_max, ~std::uint64_t(0), [center](int v) { return v >= center; })) {
        int lo = g.nv;
        for (int b : e) lo = std::min({lo, g.ends[b][0], g.ends[b][1]});
        if (lo == center) out.rooted_min[e.size()] += 1;
    }
    // independent bond-animal search through the center, weighted by 1/|V|
    EvenEnumerator en(g, r_max, ~std::uint64_t(0));
    std::function<bool(int)> any = [](int) { return true; };
    en.run(center, any, [&](const std::vector<int>& e, int nv) { out.weighted[e.size()] += mpq_class(1, nv); });
    return out;
}

std::vector<mpq_class> per_site_log_series(LatticeKind kind, int r_max) {
    int dim = int(LatticeSpec::forward_steps(kind)[0].size());
    auto lat = LatticeSpec::make(kind, std::vector<int>(dim, r_max + 1), true);
    auto counts = count_even_subgraphs(lat, r_max);
    auto l = log_series(counts.total, r_max);
    for (auto& c : l) c /= lat.sites();
    return l;
}

bool sc_closedness(const LoopGraph& graph) {
    auto sum = graph_loop_sum(graph);
    for (const auto& term : sum.terms) {
        bool closed = true;
        for (const auto& loop : term.loops) {
            std::array<int, 3> net{};
            for (int nu : loop) net[(nu - 1) % 3] += nu <= 3 ? 1 : -1;
            if (net != std::array<int, 3>{}) closed = false;
        }
        if (closed) return true;
    }
    return false;
}

}  // namespace isingloop
