#include <doctest.h>

#include <stdexcept>

#include "lobswitch/grid.hpp"

using namespace lobswitch;

namespace {

std::size_t brute_count(const GridSpec& s) {
    std::size_t n = 0;
    for (int pa = s.pa_min; pa <= s.pa_max; ++pa)
        for (int pb = s.pb_min; pb <= s.pb_max; ++pb)
            if (pa > pb)
                n += std::size_t(s.qa_max + 1) * (s.qb_max + 1) * (s.inv_max - s.inv_min + 1);
    return n;
}

}  // namespace

TEST_CASE("default grid size") {
    const GridSpec spec;
    const auto grid = build_grid(spec);
    CHECK(grid.size() == 104181);
    CHECK(grid.size() == brute_count(spec));
    CHECK(grid.size() == 11u * 11 * 41 * 21);
    CHECK(count_admissible(spec) == grid.size());
    CHECK(grid.price_pairs() == 21);
}

TEST_CASE("degenerate grids") {
    GridSpec empty;
    empty.pa_min = empty.pa_max = empty.pb_min = empty.pb_max = 15;
    CHECK(count_admissible(empty) == 0);
    CHECK(Grid(empty).size() == 0);
    CHECK_THROWS_AS(build_grid(empty), std::invalid_argument);

    GridSpec tiny;
    tiny.pa_min = tiny.pa_max = 16;
    tiny.pb_min = tiny.pb_max = 15;
    tiny.qa_max = tiny.qb_max = 1;
    tiny.inv_min = tiny.inv_max = 0;
    CHECK(build_grid(tiny).size() == 4);
}

TEST_CASE("node order and index round trip") {
    const auto grid = build_grid(GridSpec{});
    const auto first = grid.node(0);
    CHECK(first == GridNode{0, 0, -20, 13, 12});
    for (std::size_t i = 0; i < grid.size(); i += 997) CHECK(grid.index(grid.node(i)) == i);
    CHECK(grid.index(grid.node(grid.size() - 1)) == grid.size() - 1);
    CHECK(grid.node(1).inv == -19);
    CHECK_THROWS_AS(grid.index(GridNode{0, 0, 0, 15, 15}), std::out_of_range);
    CHECK_FALSE(grid.contains(GridNode{11, 0, 0, 16, 15}));
}

TEST_CASE("snapping") {
    const auto grid = build_grid(GridSpec{});
    auto snapped = [&](BookState b, double inv) { return grid.node(grid.snap(b, inv).index); };
    CHECK(snapped({4.5, 2.4, 16, 15}, 0.5) == GridNode{5, 2, 1, 16, 15});
    const auto r = grid.snap({5, 5, 16, 15}, 30);
    CHECK(r.inventory_clamped);
    CHECK(r.clamped);
    CHECK(grid.node(r.index).inv == 20);
    CHECK(snapped({15, 0, 20, 15}, -25) == GridNode{10, 0, -20, 18, 15});
    CHECK(snapped({5, 5, 12, 12}, 0) == GridNode{5, 5, 0, 13, 12});
    CHECK_FALSE(grid.snap({5, 5, 16, 15}, 0).clamped);
}
