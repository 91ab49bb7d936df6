#include "lobswitch/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lobswitch {

namespace {

bool is_integer(double u) { return u == std::floor(u); }

// Domain check for one side of a control. Only the shape of the value is
// checked here; price bounds are the business of admissible_controls.
void check_component(EpochKind kind, bool arrival, double u) {
    if (!std::isfinite(u)) throw std::invalid_argument("control must be finite");
    switch (kind) {
        case EpochKind::Done:
            if (u != 0.0) throw std::invalid_argument("no trading after the horizon");
            return;
        case EpochKind::Terminal:
            if (u < 0.0) throw std::invalid_argument("terminal control must be >= 0");
            return;
        case EpochKind::Interior:
        case EpochKind::AskArrival:
        case EpochKind::BidArrival:
            if (arrival) {
                if (u < -1.0 || (u > 1.0 && !is_integer(u)))
                    throw std::invalid_argument("arrival control must lie in [-1,1] or be an integer >= 2");
            } else if (u < 0.0 || !is_integer(u)) {
                throw std::invalid_argument("control must be a non-negative integer, got " +
                                            std::to_string(u));
            }
            return;
    }
}

std::vector<double> mesh_values(double upper, double step) {
    std::vector<double> out;
    if (upper <= 0.0) return {0.0};
    const auto n = static_cast<long>(std::llround(upper / step));
    for (long i = 0; i <= n; ++i) out.push_back(std::min(upper, i * step));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> integer_range(int lo, int hi) {
    std::vector<double> out;
    for (int i = lo; i <= hi; ++i) out.push_back(i);
    return out;
}

double mid(int pa, int pb) { return 0.5 * (pa + pb); }

}  // namespace

int integer_part(double u) { return static_cast<int>(std::floor(u)); }

double fractional_part(double u) { return u - std::floor(u); }

std::vector<double> arrival_fill_set(int room, TraderKind trader, const ControlMesh& mesh,
                                     double arrival_volume) {
    if (room <= -1) return {-1.0};
    if (room == 0) return {-1.0, 0.0};
    if (trader == TraderKind::Regular) return {-1.0, 0.0, 1.0};

    std::vector<double> fractions;
    const double rounded = std::round(arrival_volume);
    if (mesh.share_granular_arrivals && arrival_volume >= 0.0 &&
        std::abs(arrival_volume - rounded) < 1e-9) {
        const auto q = static_cast<int>(rounded);
        for (int j = 1; j < q; ++j) fractions.push_back(static_cast<double>(j) / q);
    } else {
        if (!(mesh.fraction_step > 0.0 && mesh.fraction_step <= 1.0))
            throw std::invalid_argument("fraction_step must lie in (0,1]");
        for (double f = mesh.fraction_step; f < 1.0 - 1e-12; f += mesh.fraction_step)
            fractions.push_back(f);
    }
    std::vector<double> out{-1.0};
    for (double f : fractions) out.push_back(-1.0 + f);
    out.push_back(0.0);
    for (double f : fractions) out.push_back(f);
    out.push_back(1.0);
    return out;
}

std::vector<SwitchDecision> admissible_controls(EpochKind kind, int pa, int pb, TraderKind trader,
                                                const PriceLimits& limits,
                                                const ControlMesh& mesh, double arrival_volume) {
    if (pa <= pb)
        throw std::invalid_argument("admissible_controls: need pa > pb, got pa=" +
                                    std::to_string(pa) + " pb=" + std::to_string(pb));
    const int room_a = limits.pa_bar - pa;
    const int room_b = pb - limits.pb_under;
    const int max_a = std::max(0, room_a);
    const int max_b = std::max(0, room_b);

    std::vector<double> side_a;
    std::vector<double> side_b;
    switch (kind) {
        case EpochKind::Done:
            return {SwitchDecision{}};
        case EpochKind::Interior:
            side_a = integer_range(0, max_a);
            side_b = integer_range(0, max_b);
            break;
        case EpochKind::AskArrival:
            side_a = arrival_fill_set(room_a, trader, mesh, arrival_volume);
            for (int i = 2; i <= max_a; ++i) side_a.push_back(i);
            side_b = integer_range(0, max_b);
            break;
        case EpochKind::BidArrival:
            side_a = integer_range(0, max_a);
            side_b = arrival_fill_set(room_b, trader, mesh, arrival_volume);
            for (int i = 2; i <= max_b; ++i) side_b.push_back(i);
            break;
        case EpochKind::Terminal:
            if (!(mesh.fraction_step > 0.0 && mesh.fraction_step <= 1.0))
                throw std::invalid_argument("fraction_step must lie in (0,1]");
            side_a = mesh_values(max_a, mesh.fraction_step);
            side_b = mesh_values(max_b, mesh.fraction_step);
            break;
    }

    std::vector<SwitchDecision> out;
    out.reserve(side_a.size() * side_b.size());
    for (double ua : side_a)
        for (double ub : side_b)
            if (kind != EpochKind::Interior || ua != 0.0 || ub != 0.0) out.push_back({ua, ub});
    std::sort(out.begin(), out.end(), [](const SwitchDecision& x, const SwitchDecision& y) {
        return x.ua != y.ua ? x.ua < y.ua : x.ub < y.ub;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<HiddenFlags> admissible_hidden(int pa, int pb, const PriceLimits& limits) {
    std::vector<HiddenFlags> out{{0, 0}};
    if (pb < limits.pa_bar) out.push_back({1, 0});
    if (pa > limits.pb_under) out.push_back({0, 1});
    return out;
}

bool is_admissible(HiddenFlags h, int pa, int pb, const PriceLimits& limits) {
    if ((h.ha != 0 && h.ha != 1) || (h.hb != 0 && h.hb != 1)) return false;
    if (h.ha == 1 && h.hb == 1) return false;
    if (h.ha == 1 && pb >= limits.pa_bar) return false;
    if (h.hb == 1 && pa <= limits.pb_under) return false;
    return true;
}

double shares_traded(Side /*side*/, EpochKind kind, bool arrival, double q, double u,
                     double delta) {
    if (q < 0.0) throw std::invalid_argument("shares_traded: negative volume");
    check_component(kind, arrival, u);
    const int whole = integer_part(u);
    const double frac = fractional_part(u);
    const double book = u >= 1.0 ? q + (u - 1.0) * delta : 0.0;
    if (kind == EpochKind::Done) return 0.0;
    if (kind == EpochKind::Terminal) return book + (whole == 0 ? u * q : 0.0);
    if (!arrival) return book;
    return book + (u >= 0.0 ? delta : 0.0) + (whole <= 0 ? frac * q : 0.0);
}

double cash_flow(Side side, EpochKind kind, bool arrival, double q, int p, double u, double delta,
                 double epsilon) {
    if (q < 0.0) throw std::invalid_argument("cash_flow: negative volume");
    check_component(kind, arrival, u);
    if (kind == EpochKind::Done) return 0.0;

    const int whole = integer_part(u);
    const double frac = fractional_part(u);
    // Limits beyond the best quote sit one tick further out each: higher
    // on the ask, lower on the bid.
    const double dir = side == Side::Ask ? 1.0 : -1.0;

    if (kind == EpochKind::Terminal) {
        double cash = 0.0;
        if (u >= 1.0)
            cash += p * (q + (u - 1.0) * delta) +
                    dir * (0.5 * whole * (whole - 1) + whole * frac) * delta;
        if (whole == 0) cash += p * u * q;
        return cash;
    }

    double cash = 0.0;
    if (u >= 1.0) cash += p * (q + (u - 1.0) * delta) + dir * 0.5 * u * (u - 1.0) * delta;
    if (arrival) {
        // The arriving limit sits one tick inside; partial fills at the old
        // quote carry the premium.
        if (u >= 0.0) cash += (p - dir) * delta;
        if (whole <= 0) cash += (p + dir * epsilon) * frac * q;
    }
    return cash;
}

double net_shares(EpochKind kind, const BookState& book, const SwitchDecision& u,
                  const ModelParams& params) {
    const bool arr_a = kind == EpochKind::AskArrival;
    const bool arr_b = kind == EpochKind::BidArrival;
    return shares_traded(Side::Ask, kind, arr_a, book.qa, u.ua, params.delta_a) -
           shares_traded(Side::Bid, kind, arr_b, book.qb, u.ub, params.delta_b);
}

double net_cash_flow(EpochKind kind, const BookState& book, const SwitchDecision& u,
                     const ModelParams& params) {
    const bool arr_a = kind == EpochKind::AskArrival;
    const bool arr_b = kind == EpochKind::BidArrival;
    return -cash_flow(Side::Ask, kind, arr_a, book.qa, book.pa, u.ua, params.delta_a,
                      params.epsilon) +
           cash_flow(Side::Bid, kind, arr_b, book.qb, book.pb, u.ub, params.delta_b,
                     params.epsilon);
}

std::pair<BookState, double> apply_switch(EpochKind kind, const BookState& book, double inventory,
                                          const SwitchDecision& u, const ModelParams& params) {
    const double traded = net_shares(kind, book, u, params);
    BookState next = book;
    next.arrival = ArrivalFlag::None;
    if (kind == EpochKind::Done) return {next, inventory};

    const auto side_volume = [kind](double q, double ui, double delta) {
        const int whole = integer_part(ui);
        const double frac = fractional_part(ui);
        if (kind == EpochKind::Terminal)
            return (1.0 - frac) * (ui >= 1.0 ? delta : (whole == 0 ? q : 0.0));
        return whole != 0 ? delta : (1.0 - frac) * q;
    };
    next.qa = side_volume(book.qa, u.ua, params.delta_a);
    next.qb = side_volume(book.qb, u.ub, params.delta_b);
    next.pa = book.pa + integer_part(u.ua);
    next.pb = book.pb - integer_part(u.ub);
    if (next.pa <= next.pb)
        throw std::logic_error("apply_switch: switch would cross the book (pa=" +
                               std::to_string(next.pa) + ", pb=" + std::to_string(next.pb) + ")");
    return {next, inventory + traded};
}

double hidden_drift(int pa, int pb, HiddenFlags h, const ModelParams& params) {
    if (!is_admissible(h, pa, pb, params.limits))
        throw std::invalid_argument("hidden_drift: inadmissible hidden flags");
    const int s = pa - pb;
    const double m = mid(pa, pb);
    return -params.delta_a * h.ha * m * params.lambda_a(s) +
           params.delta_b * h.hb * m * params.lambda_b(s);
}

TraderPosition apply_hidden_fills(TraderPosition position, int pa, int pb, HiddenFlags h,
                                  HiddenFills fills, const ModelParams& params) {
    const double m = mid(pa, pb);
    if (h.ha == 1 && fills.buy) {
        position.inventory += params.delta_a;
        position.cash -= params.delta_a * m;
    }
    if (h.hb == 1 && fills.sell) {
        position.inventory -= params.delta_b;
        position.cash += params.delta_b * m;
    }
    return position;
}

EpochKind epoch_for(ArrivalFlag arrival) {
    switch (arrival) {
        case ArrivalFlag::Ask: return EpochKind::AskArrival;
        case ArrivalFlag::Bid: return EpochKind::BidArrival;
        case ArrivalFlag::None: return EpochKind::Interior;
        case ArrivalFlag::Both: break;
    }
    throw std::invalid_argument("epoch_for: simultaneous arrivals have no single epoch");
}

}  // namespace lobswitch
