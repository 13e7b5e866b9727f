#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "isingloop/walker.hpp"

namespace isingloop {

enum class LatticeKind { Chain, SQ, PT, SC };

struct Bond {
    int a, b;
    int axis;  // index into the forward directions of the lattice kind
};

struct LatticeSpec {
    LatticeKind kind = LatticeKind::SQ;
    std::vector<int> sides;
    bool periodic = true;
    std::vector<Bond> bonds;

    static LatticeSpec make(LatticeKind kind, std::vector<int> sides, bool periodic);

    int sites() const;
    int coordination() const;
    std::vector<int> coords(int site) const;
    // nullopt when outside an open lattice
    std::optional<int> index(std::vector<int> c) const;
    // forward unit steps, one per bond axis
    static std::vector<std::vector<int>> forward_steps(LatticeKind kind);
};

struct LatticeTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Exact integer coefficients of a polynomial in x, lowest power first.
using IntPoly = std::vector<mpz_class>;

// S(x) = 2^-N sum over spins of prod over bonds (1 + x s s').
IntPoly exhaustive_partition(const LatticeSpec& lattice);

inline constexpr int kMaxExhaustiveSites = 27;

struct EvenCounts {
    int r_max = 0;
    int reached = 0;         // highest order fully counted
    bool complete = true;    // false when the node budget cut the run short
    std::vector<mpz_class> total;      // all even subgraphs with r bonds (restricted to `through` if given)
    std::vector<mpz_class> connected;  // connected ones only
};

struct CountOptions {
    std::optional<int> through;
    std::uint64_t node_budget = 4'000'000'000;
    bool cycle_space = true;  // enumerate the cycle space directly when its rank is at most 20
};

EvenCounts count_even_subgraphs(const LatticeSpec& lattice, int r_max, const CountOptions& opt = {});

// Connected even subgraphs per site of the infinite lattice, two ways:
// rooted at their smallest vertex, and rooted anywhere with weight 1/|V|.
struct PerSiteCounts {
    std::vector<mpz_class> rooted_min;
    std::vector<mpq_class> weighted;
};

PerSiteCounts per_site_connected(LatticeKind kind, int r_max);

// Coefficients of (1/N) log S(x) of the infinite lattice, read off a torus of side r_max + 1.
std::vector<mpq_class> per_site_log_series(LatticeKind kind, int r_max);

// True iff some loop decomposition of the graph closes every loop in three dimensions.
bool sc_closedness(const LoopGraph& graph);

}  // namespace isingloop
