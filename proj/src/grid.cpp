#include "afdm/grid.hpp"

#include <stdexcept>

namespace afdm {

GridLayout GridLayout::all_data(int n) {
    if (n < 1) throw std::invalid_argument("GridLayout: n must be positive");
    GridLayout g;
    g.roles.assign(static_cast<std::size_t>(n), BinRole::data);
    return g;
}

GridLayout GridLayout::point_pilot(int n, int pilot) {
    GridLayout g = all_data(n);
    if (pilot < 0 || pilot >= n) throw std::invalid_argument("GridLayout: pilot index out of range");
    g.roles.assign(static_cast<std::size_t>(n), BinRole::guard);
    g.roles[static_cast<std::size_t>(pilot)] = BinRole::pilot;
    g.pilot_index = pilot;
    return g;
}

GridLayout GridLayout::embedded_pilot(int n, int pilot, int guard_each_side,
                                      double pilot_amplitude) {
    GridLayout g = all_data(n);
    if (pilot < 0 || pilot >= n) throw std::invalid_argument("GridLayout: pilot index out of range");
    if (guard_each_side < 0 || 2 * guard_each_side + 1 > n)
        throw std::invalid_argument("GridLayout: guard width does not fit");
    for (int off = -guard_each_side; off <= guard_each_side; ++off) {
        const int idx = ((pilot + off) % n + n) % n;
        g.roles[static_cast<std::size_t>(idx)] = BinRole::guard;
    }
    g.roles[static_cast<std::size_t>(pilot)] = BinRole::pilot;
    g.pilot_index = pilot;
    g.pilot_amplitude = pilot_amplitude;
    return g;
}

void GridLayout::reserve_guard_band(int start, int len) {
    const int nn = n();
    if (len < 0 || len > nn) throw std::invalid_argument("GridLayout: guard band does not fit");
    for (int off = 0; off < len; ++off) {
        const int idx = ((start + off) % nn + nn) % nn;
        if (roles[static_cast<std::size_t>(idx)] == BinRole::pilot)
            throw std::invalid_argument("GridLayout: guard band overlaps the pilot");
        if (roles[static_cast<std::size_t>(idx)] == BinRole::data)
            roles[static_cast<std::size_t>(idx)] = BinRole::guard_band;
    }
}

int GridLayout::count(BinRole role) const {
    int c = 0;
    for (const auto r : roles)
        if (r == role) ++c;
    return c;
}

std::vector<int> GridLayout::indices(BinRole role) const {
    std::vector<int> out;
    for (int i = 0; i < n(); ++i)
        if (roles[static_cast<std::size_t>(i)] == role) out.push_back(i);
    return out;
}

void GridLayout::validate() const {
    if (roles.empty()) throw std::invalid_argument("GridLayout: empty");
    const int pilots = count(BinRole::pilot);
    if (pilots > 1) throw std::invalid_argument("GridLayout: at most one pilot bin");
    if (pilots == 1) {
        if (pilot_index < 0 || pilot_index >= n() ||
            roles[static_cast<std::size_t>(pilot_index)] != BinRole::pilot)
            throw std::invalid_argument("GridLayout: pilot_index inconsistent with roles");
    } else if (pilot_index >= 0) {
        throw std::invalid_argument("GridLayout: pilot_index set but no pilot bin");
    }
}

DaftGrid build_grid(const GridLayout& layout, const CVec& data, cplx pilot) {
    layout.validate();
    const auto data_idx = layout.indices(BinRole::data);
    if (data.size() != data_idx.size())
        throw std::invalid_argument("build_grid: data count does not match layout");
    DaftGrid grid;
    grid.layout = layout;
    grid.values.assign(layout.roles.size(), cplx{0.0, 0.0});
    for (std::size_t i = 0; i < data_idx.size(); ++i)
        grid.values[static_cast<std::size_t>(data_idx[i])] = data[i];
    if (layout.pilot_index >= 0)
        grid.values[static_cast<std::size_t>(layout.pilot_index)] = pilot;
    return grid;
}

}  // namespace afdm
