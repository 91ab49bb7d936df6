#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "lobswitch/types.hpp"

namespace lobswitch {

/// State ranges and time mesh for the dynamic programme.
struct GridSpec {
    int qa_max = 10;
    int qb_max = 10;
    int inv_min = -20;
    int inv_max = 20;
    int pa_min = 12;
    int pa_max = 18;
    int pb_min = 12;
    int pb_max = 18;
    double t0 = 1.0;
    int steps = 9;  ///< number of time steps K; decision times t0 + k dt, k = 0..K
    double dt = 1.0;

    double time(int k) const { return t0 + k * dt; }
    void validate() const;
};

/// One grid point (qa, qb, I, pa, pb).
struct GridNode {
    int qa = 0;
    int qb = 0;
    int inv = 0;
    int pa = 0;
    int pb = 0;

    BookState book() const { return BookState{double(qa), double(qb), pa, pb, ArrivalFlag::None}; }
    friend bool operator==(const GridNode&, const GridNode&) = default;
};

struct SnapResult {
    std::size_t index = 0;
    bool inventory_clamped = false;
    bool clamped = false;  ///< any coordinate (volume, inventory or price) left the grid
};

/// Dense enumeration of the admissible nodes (pa > pb). Node order is
/// price pair (pa ascending, then pb ascending), then qa, qb, inventory.
class Grid {
public:
    explicit Grid(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    std::size_t size() const { return size_; }
    std::size_t price_pairs() const { return pairs_.size(); }

    GridNode node(std::size_t index) const;
    /// Index of an in-range node; throws std::out_of_range otherwise.
    std::size_t index(const GridNode& node) const;
    bool contains(const GridNode& node) const;

    /// Nearest grid node: volumes and inventory round to the nearest integer
    /// (halves upward) and are clamped to range; prices are clamped, and an
    /// inadmissible clamped pair is replaced by the nearest admissible one.
    SnapResult snap(const BookState& book, double inventory) const;

private:
    std::size_t pair_slot(int pa, int pb) const;

    GridSpec spec_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<std::size_t> pair_lookup_;  ///< (pa, pb) in range -> nearest admissible pair
    std::vector<std::size_t> pair_exact_;   ///< (pa, pb) in range -> pair index or npos
    std::size_t n_qa_ = 0;
    std::size_t n_qb_ = 0;
    std::size_t n_inv_ = 0;
    std::size_t size_ = 0;
};

/// Builds and validates the grid. Throws std::invalid_argument if no node
/// is admissible.
Grid build_grid(const GridSpec& spec);

/// Same count as Grid::size computed without building the grid.
std::size_t count_admissible(const GridSpec& spec);

}  // namespace lobswitch
