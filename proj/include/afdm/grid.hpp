// grid.hpp - DAFT-domain symbol grids and index-role layouts
//
// A layout assigns every DAFT bin one of four roles. The embedded-pilot
// (HDRS) layout surrounds the pilot with guard bins so that channel shifts
// cannot mix pilot and data; guard bands reserve additional regions, used
// by the full-duplex scheme to keep the two users' pilots separable.
#pragma once

#include "afdm/types.hpp"

#include <cstdint>
#include <vector>

namespace afdm {

enum class BinRole : std::uint8_t { data, pilot, guard, guard_band };

struct GridLayout {
    std::vector<BinRole> roles;
    int pilot_index = -1;
    double pilot_amplitude = 1.0;

    static GridLayout all_data(int n);
    // Pilot at one bin, every other bin guarded (deterministic reference symbol).
    static GridLayout point_pilot(int n, int pilot);
    // Pilot with guard_each_side guard bins on both sides, data elsewhere.
    static GridLayout embedded_pilot(int n, int pilot, int guard_each_side,
                                     double pilot_amplitude = 1.0);

    // Mark a contiguous (cyclic) range of currently-data bins as guard band.
    void reserve_guard_band(int start, int len);

    int n() const { return static_cast<int>(roles.size()); }
    int count(BinRole role) const;
    std::vector<int> indices(BinRole role) const;
    void validate() const;
};

struct DaftGrid {
    CVec values;
    GridLayout layout;
};

// Place data symbols on DATA bins in index order, the pilot value on the
// PILOT bin, exact zeros elsewhere.
DaftGrid build_grid(const GridLayout& layout, const CVec& data, cplx pilot = cplx{0.0, 0.0});

}  // namespace afdm
