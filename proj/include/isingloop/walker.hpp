#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "isingloop/ring.hpp"

namespace isingloop {

// Printed: step vectors and Fourier shifts exactly as the printed recurrence.
// Planar:  geometric triangular lattice, direction nu at angle (nu-1)*60 deg.
// TaggedSC: cubic axes +x,+y,+z,-x,-y,-z seen along the body diagonal.
enum class WalkMode { Printed, Planar, TaggedSC };

struct Direction {
    int nu;                    // 1..6
    int angle;                 // multiples of 60 deg, 0..5
    std::array<int, 2> plane;  // axial step on the triangular lattice
    std::array<int, 3> shift;  // lattice shift used by the Fourier transform
    TagMonomial half_tag;      // square root of the per-step tag (SC only)
};

struct DirectionSet {
    WalkMode mode;
    std::array<Direction, 6> dir;  // index nu-1

    const Direction& operator()(int nu) const { return dir[nu - 1]; }
    int fourier_dims() const { return mode == WalkMode::TaggedSC ? 3 : 2; }
};

const DirectionSet& directions(WalkMode mode);
inline int reverse_dir(int nu) { return (nu + 2) % 6 + 1; }
// Turn from prev to next in units of 60 deg, in -2..2; 3 for a U-turn.
int turn_units(const DirectionSet& ds, int prev, int next);

using OmegaMatrix = Eigen::Matrix<TaggedPoly, 6, 6>;

struct PropagatorMatrix {
    WalkMode mode;
    bool fourier = false;
    OmegaMatrix omega;  // row = new direction, column = previous direction
};

PropagatorMatrix build_pt_propagator(WalkMode layout = WalkMode::Printed);
PropagatorMatrix build_sc_propagator();
PropagatorMatrix fourier_matrix(const PropagatorMatrix& prop);

struct TraceResult {
    TaggedPoly trace;  // tr Omega^r
    mpq_class f_factor;  // 1/(2r), so f_r = f_factor * trace
};
TraceResult trace_power(const PropagatorMatrix& prop, int r);

struct LoopWalk {
    std::array<int, 2> base{0, 0};
    std::vector<int> dirs;
    CycloNum phase{1};
    TagMonomial tag;
    int rotation = 0;            // total tangent turn in units of 60 deg
    int self_intersections = -1;  // -1 until counted
};

enum class Dedup { None, Reversal, CyclicShift };

struct LoopLattice {
    WalkMode mode = WalkMode::Planar;
    int period = 0;  // 0: infinite plane; otherwise closure modulo period in both axial coordinates
};

struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnumerateOptions {
    Dedup dedup = Dedup::None;
    int max_len_bound = 12;
    std::uint64_t node_budget = 100'000'000;
    bool count_crossings = true;
};

// Closed non-backtracking walks of length 1..max_len from the origin.
std::vector<LoopWalk> enumerate_loops(const LoopLattice& lattice, int max_len, const EnumerateOptions& opt = {});

// Fills rotation, phase and tag of a closed direction sequence.
LoopWalk make_loop(const DirectionSet& ds, const std::vector<int>& dirs, std::array<int, 2> base = {0, 0});

// Transversal self-crossings of the planar embedding, by exact segment tests on a
// randomly perturbed copy of the polygon (seeded, re-drawn on degeneracy).
int count_self_intersections(const DirectionSet& ds, const LoopWalk& walk, std::uint64_t seed = 1);

bool whitney_check(const LoopWalk& walk);

// Edges of a graph drawn on the triangular lattice; each carries its direction label.
struct LatticeEdge {
    std::array<int, 2> from;
    int nu;
};

struct LoopGraph {
    WalkMode mode = WalkMode::Planar;
    std::vector<LatticeEdge> edges;

    static LoopGraph from_steps(WalkMode mode, const std::vector<int>& steps, std::array<int, 2> start = {0, 0});
};

struct LoopTerm {
    std::vector<std::vector<int>> loops;  // direction sequences in traversal order
    int sign = 1;                          // (-1)^{number of loops}
    int phase_exponent = 0;                // A^k with k = total turn units, mod 12
    TagMonomial tag;
    CycloNum factor() const { return CycloNum(sign) * cyclo_pow(phase_exponent); }
};

struct GraphLoopSum {
    TaggedPoly total;
    std::vector<LoopTerm> terms;
};

struct NotEvenSubgraph : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

GraphLoopSum graph_loop_sum(const LoopGraph& graph);

// Step sequences (SC labels) of the three worked graphs.
std::vector<int> example_steps(int which);

}  // namespace isingloop
