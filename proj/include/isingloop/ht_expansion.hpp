#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "isingloop/oracle.hpp"

namespace isingloop {

// Box of sites with every offset in [-radius, radius]; site 0 is the center and
// sites are numbered by (L1 distance, offset) from it.
struct WindowLattice {
    LatticeKind kind = LatticeKind::SQ;
    int radius = 0;
    std::vector<std::vector<int>> offsets;
    std::vector<int> box_to_site;  // row-major box index -> site

    static WindowLattice make(LatticeKind kind, int radius);
    int dim() const { return kind == LatticeKind::SQ ? 2 : 3; }
    int sites() const { return int(offsets.size()); }
    int center() const { return 0; }
    std::optional<int> site(const std::vector<int>& offset) const;
    // same box as an open LatticeSpec, with the center's index there
    LatticeSpec as_lattice(int& center_index) const;
};

struct BondFactor {
    int a, b;
    char family;  // 'A'..'F'
};

struct ProductTerms {
    std::vector<BondFactor> factors;
    std::vector<int> raw_per_family;  // index-range sizes before clipping to the window
    int clipped = 0;                  // factors leaving the window
    int merged = 0;                   // duplicates removed by bond dedup
};

ProductTerms build_product_terms(const WindowLattice& window, bool bond_dedup = true);

struct SpinMonomial {
    std::vector<int> odd;  // sites with odd exponent
    int power = 0;
    mpz_class coeff;
};

struct ExpandOptions {
    bool require_center = false;
    int center = 0;
    // drop terms once a finished site is odd and terms that cannot close within the order
    bool prune_odd = false;
    std::size_t term_budget = 20'000'000;
};

std::vector<SpinMonomial> expand_and_reduce(const std::vector<BondFactor>& factors, int order,
                                            const ExpandOptions& opt = {});

std::vector<mpz_class> sum_over_configurations(const std::vector<SpinMonomial>& monomials, int order);

IntPoly full_partition_polynomial(const LatticeSpec& lattice, std::size_t term_budget = 20'000'000);

struct WindowSeries {
    LatticeKind kind = LatticeKind::SQ;
    int order = 0, radius = 0;
    bool through_center = true, bond_dedup = true;
    std::vector<mpz_class> g;
};

int default_window_radius(int order);

WindowSeries window_series(LatticeKind kind, int order, int radius = -1, bool through_center = true,
                           bool bond_dedup = true);

}  // namespace isingloop
