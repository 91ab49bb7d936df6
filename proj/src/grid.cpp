#include "lobswitch/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lobswitch {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

}  // namespace

void GridSpec::validate() const {
    if (qa_max < 0 || qb_max < 0) throw std::invalid_argument("volume ranges must be non-empty");
    if (inv_min > inv_max) throw std::invalid_argument("inventory range is empty");
    if (pa_min > pa_max || pb_min > pb_max) throw std::invalid_argument("price range is empty");
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0))
        throw std::invalid_argument("time mesh needs finite t0 and dt > 0");
}

std::size_t count_admissible(const GridSpec& spec) {
    std::size_t pairs = 0;
    for (int pa = spec.pa_min; pa <= spec.pa_max; ++pa)
        for (int pb = spec.pb_min; pb <= spec.pb_max; ++pb)
            if (pa > pb) ++pairs;
    return pairs * std::size_t(spec.qa_max + 1) * std::size_t(spec.qb_max + 1) *
           std::size_t(spec.inv_max - spec.inv_min + 1);
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    const int na = spec_.pa_max - spec_.pa_min + 1;
    const int nb = spec_.pb_max - spec_.pb_min + 1;
    pair_exact_.assign(std::size_t(na) * nb, npos);
    for (int pa = spec_.pa_min; pa <= spec_.pa_max; ++pa)
        for (int pb = spec_.pb_min; pb <= spec_.pb_max; ++pb)
            if (pa > pb) {
                pair_exact_[pair_slot(pa, pb)] = pairs_.size();
                pairs_.emplace_back(pa, pb);
            }

    pair_lookup_.assign(pair_exact_.size(), npos);
    for (int pa = spec_.pa_min; pa <= spec_.pa_max; ++pa)
        for (int pb = spec_.pb_min; pb <= spec_.pb_max; ++pb) {
            const std::size_t slot = pair_slot(pa, pb);
            if (pair_exact_[slot] != npos) {
                pair_lookup_[slot] = pair_exact_[slot];
                continue;
            }
            // Nearest admissible pair in L1 distance; the first in node
            // order wins ties.
            int best = std::numeric_limits<int>::max();
            for (std::size_t i = 0; i < pairs_.size(); ++i) {
                const int d = std::abs(pairs_[i].first - pa) + std::abs(pairs_[i].second - pb);
                if (d < best) {
                    best = d;
                    pair_lookup_[slot] = i;
                }
            }
        }

    n_qa_ = std::size_t(spec_.qa_max + 1);
    n_qb_ = std::size_t(spec_.qb_max + 1);
    n_inv_ = std::size_t(spec_.inv_max - spec_.inv_min + 1);
    size_ = pairs_.size() * n_qa_ * n_qb_ * n_inv_;
}

std::size_t Grid::pair_slot(int pa, int pb) const {
    return std::size_t(pa - spec_.pa_min) * std::size_t(spec_.pb_max - spec_.pb_min + 1) +
           std::size_t(pb - spec_.pb_min);
}

GridNode Grid::node(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("grid node index out of range");
    GridNode n;
    n.inv = spec_.inv_min + int(index % n_inv_);
    index /= n_inv_;
    n.qb = int(index % n_qb_);
    index /= n_qb_;
    n.qa = int(index % n_qa_);
    index /= n_qa_;
    n.pa = pairs_[index].first;
    n.pb = pairs_[index].second;
    return n;
}

bool Grid::contains(const GridNode& n) const {
    if (n.qa < 0 || n.qa > spec_.qa_max || n.qb < 0 || n.qb > spec_.qb_max) return false;
    if (n.inv < spec_.inv_min || n.inv > spec_.inv_max) return false;
    if (n.pa < spec_.pa_min || n.pa > spec_.pa_max || n.pb < spec_.pb_min || n.pb > spec_.pb_max)
        return false;
    return pair_exact_[pair_slot(n.pa, n.pb)] != npos;
}

std::size_t Grid::index(const GridNode& n) const {
    if (!contains(n)) throw std::out_of_range("node is not on the grid");
    const std::size_t pair = pair_exact_[pair_slot(n.pa, n.pb)];
    return ((pair * n_qa_ + std::size_t(n.qa)) * n_qb_ + std::size_t(n.qb)) * n_inv_ +
           std::size_t(n.inv - spec_.inv_min);
}

SnapResult Grid::snap(const BookState& book, double inventory) const {
    SnapResult r;
    const auto clamp_int = [&r](int v, int lo, int hi) {
        if (v < lo) {
            r.clamped = true;
            return lo;
        }
        if (v > hi) {
            r.clamped = true;
            return hi;
        }
        return v;
    };
    const int qa = clamp_int(round_half_up(book.qa), 0, spec_.qa_max);
    const int qb = clamp_int(round_half_up(book.qb), 0, spec_.qb_max);
    const bool before = r.clamped;
    const int inv = clamp_int(round_half_up(inventory), spec_.inv_min, spec_.inv_max);
    r.inventory_clamped = r.clamped && !before;
    const int pa = clamp_int(book.pa, spec_.pa_min, spec_.pa_max);
    const int pb = clamp_int(book.pb, spec_.pb_min, spec_.pb_max);
    const std::size_t slot = pair_slot(pa, pb);
    if (pair_exact_[slot] == npos) r.clamped = true;
    const std::size_t pair = pair_lookup_[slot];
    r.index = ((pair * n_qa_ + std::size_t(qa)) * n_qb_ + std::size_t(qb)) * n_inv_ +
              std::size_t(inv - spec_.inv_min);
    return r;
}

Grid build_grid(const GridSpec& spec) {
    Grid grid(spec);
    if (grid.size() == 0) throw std::invalid_argument("grid has no admissible node (need pa > pb)");
    return grid;
}

}  // namespace lobswitch
