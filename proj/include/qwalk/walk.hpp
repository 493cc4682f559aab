#pragma once

// Exact lattice dynamics of the coined walk on Z:
//   R_{x,t+1} = R_{x+1,t} cos(theta) + L_{x+1,t} sin(theta)
//   L_{x,t+1} = R_{x-1,t} sin(theta) - L_{x-1,t} cos(theta)

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qwalk/config.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

using cplx = std::complex<double>;

class CoinParameter {
public:
    explicit CoinParameter(double theta) : theta_(theta) {
        if (!(theta >= 0.0 && theta <= pi / 2)) {
            throw DomainError("coin angle theta must lie in [0, pi/2], got " + std::to_string(theta));
        }
        // Exact endpoints keep the degenerate maps (pure shift / swap) exact.
        cos_ = theta == pi / 2 ? 0.0 : std::cos(theta);
        sin_ = theta == 0.0 ? 0.0 : std::sin(theta);
    }

    double theta() const noexcept { return theta_; }
    double cos() const noexcept { return cos_; }
    double sin() const noexcept { return sin_; }
    double tan() const noexcept { return sin_ / cos_; }

    // Interior of the range, where the plane-wave eigenbasis is well defined.
    bool interior() const noexcept { return theta_ > 0.0 && theta_ < pi / 2; }

private:
    double theta_;
    double cos_;
    double sin_;
};

struct ProbabilityDistribution {
    std::int64_t t = 0;
    std::int64_t x_min = 0;
    std::vector<double> P;

    std::int64_t x_max() const noexcept { return x_min + static_cast<std::int64_t>(P.size()) - 1; }
    std::size_t size() const noexcept { return P.size(); }
    double at(std::int64_t x) const noexcept {
        const auto i = x - x_min;
        return (i < 0 || i >= static_cast<std::int64_t>(P.size())) ? 0.0 : P[static_cast<std::size_t>(i)];
    }
    double total() const noexcept {
        double s = 0.0;
        for (double p : P) s += p;
        return s;
    }
};

// Spinor amplitudes (R, L) on the window [x_min, x_max] at time t.
//
// The boundary sites are kept at exactly zero, so a map step (which grows the
// window by one site per side) never drops amplitude.
class WalkerState {
public:
    WalkerState() = default;

    // Builds a state from raw amplitudes starting at site x_min. Pads with one
    // zero site on each side where needed. When normalize is true the state is
    // scaled to unit norm (zero states are rejected).
    static WalkerState from_amplitudes(std::int64_t x_min, std::vector<cplx> R, std::vector<cplx> L,
                                       bool normalize = true, std::int64_t t = 0) {
        if (R.size() != L.size()) throw InvalidSpecError("R and L must have the same length");
        if (R.empty()) throw InvalidSpecError("state window is empty");
        WalkerState s;
        s.t_ = t;
        s.x_min_ = x_min;
        s.R_ = std::move(R);
        s.L_ = std::move(L);
        s.pad();
        if (normalize) {
            const double n2 = s.norm2();
            if (!(n2 > 0.0) || !std::isfinite(n2)) throw InvalidSpecError("cannot normalize a zero or non-finite state");
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& v : s.R_) v *= inv;
            for (auto& v : s.L_) v *= inv;
        }
        return s;
    }

    // Single-site state coin * delta_{x,x0}.
    static WalkerState localized(std::int64_t x0, cplx coin_r, cplx coin_l, bool normalize = true) {
        return from_amplitudes(x0, {coin_r}, {coin_l}, normalize);
    }

    std::int64_t t() const noexcept { return t_; }
    std::int64_t x_min() const noexcept { return x_min_; }
    std::int64_t x_max() const noexcept { return x_min_ + static_cast<std::int64_t>(R_.size()) - 1; }
    std::size_t width() const noexcept { return R_.size(); }

    std::span<const cplx> R() const noexcept { return R_; }
    std::span<const cplx> L() const noexcept { return L_; }

    cplx R_at(std::int64_t x) const noexcept { return get(R_, x); }
    cplx L_at(std::int64_t x) const noexcept { return get(L_, x); }

    double norm2() const noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < R_.size(); ++i) s += std::norm(R_[i]) + std::norm(L_[i]);
        return s;
    }

    // First and last sites carrying nonzero amplitude; {x_min+1, x_min} when empty.
    std::pair<std::int64_t, std::int64_t> support() const noexcept {
        std::int64_t lo = x_max() + 1, hi = x_min_ - 1;
        for (std::size_t i = 0; i < R_.size(); ++i) {
            if (R_[i] != cplx{} || L_[i] != cplx{}) {
                const auto x = x_min_ + static_cast<std::int64_t>(i);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
        return {lo, hi};
    }

    // Unchecked construction for engines that already guarantee the padding.
    static WalkerState raw(std::int64_t t, std::int64_t x_min, std::vector<cplx> R, std::vector<cplx> L) {
        WalkerState s;
        s.t_ = t;
        s.x_min_ = x_min;
        s.R_ = std::move(R);
        s.L_ = std::move(L);
        return s;
    }

private:
    cplx get(const std::vector<cplx>& v, std::int64_t x) const noexcept {
        const auto i = x - x_min_;
        return (i < 0 || i >= static_cast<std::int64_t>(v.size())) ? cplx{} : v[static_cast<std::size_t>(i)];
    }

    void pad() {
        if (R_.front() != cplx{} || L_.front() != cplx{}) {
            R_.insert(R_.begin(), cplx{});
            L_.insert(L_.begin(), cplx{});
            --x_min_;
        }
        if (R_.back() != cplx{} || L_.back() != cplx{}) {
            R_.push_back(cplx{});
            L_.push_back(cplx{});
        }
    }

    std::int64_t t_ = 0;
    std::int64_t x_min_ = 0;
    std::vector<cplx> R_{cplx{}};
    std::vector<cplx> L_{cplx{}};
};

namespace detail {

// One map step from (R, L) on [0, n) into (R2, L2) on [0, n+2); output index
// j corresponds to input site j-1.
inline void map_step(std::span<const cplx> R, std::span<const cplx> L, std::span<cplx> R2,
                     std::span<cplx> L2, double c, double s) {
    const std::size_t n = R.size();
    // Output site y = j-1 (input coordinates): R'_y uses site y+1 = j, L'_y uses site y-1 = j-2.
    for (std::size_t j = 0; j < n + 2; ++j) {
        if (j < n) {
            R2[j] = R[j] * c + L[j] * s;
        } else {
            R2[j] = cplx{};
        }
        if (j >= 2) {
            L2[j] = R[j - 2] * s - L[j - 2] * c;
        } else {
            L2[j] = cplx{};
        }
    }
}

}  // namespace detail

inline WalkerState step(const WalkerState& state, const CoinParameter& coin) {
    const std::size_t n = state.width();
    std::vector<cplx> R(n + 2), L(n + 2);
    detail::map_step(state.R(), state.L(), R, L, coin.cos(), coin.sin());
    return WalkerState::raw(state.t() + 1, state.x_min() - 1, std::move(R), std::move(L));
}

// Applies step() `steps` times. The working buffers are allocated once at the
// final window size.
inline WalkerState evolve(const WalkerState& state, const CoinParameter& coin, std::int64_t steps,
                          std::size_t max_window = Limits::max_window) {
    if (steps < 0) throw DomainError("evolve: steps must be non-negative");
    if (steps == 0) return state;
    const std::size_t n0 = state.width();
    const std::size_t final_width = n0 + 2 * static_cast<std::size_t>(steps);
    if (final_width > max_window) {
        throw ResourceError("evolve: window of " + std::to_string(final_width) + " sites exceeds limit " +
                            std::to_string(max_window));
    }
    const double c = coin.cos(), s = coin.sin();

    // Buffers indexed by site - (x_min - steps). Active range [off, off+width).
    std::vector<cplx> Ra(final_width), La(final_width), Rb(final_width), Lb(final_width);
    std::size_t off = static_cast<std::size_t>(steps);
    std::copy(state.R().begin(), state.R().end(), Ra.begin() + static_cast<std::ptrdiff_t>(off));
    std::copy(state.L().begin(), state.L().end(), La.begin() + static_cast<std::ptrdiff_t>(off));
    std::size_t width = n0;
    for (std::int64_t k = 0; k < steps; ++k) {
        detail::map_step(std::span<const cplx>(Ra).subspan(off, width), std::span<const cplx>(La).subspan(off, width),
                         std::span<cplx>(Rb).subspan(off - 1, width + 2), std::span<cplx>(Lb).subspan(off - 1, width + 2),
                         c, s);
        std::swap(Ra, Rb);
        std::swap(La, Lb);
        --off;
        width += 2;
    }
    return WalkerState::raw(state.t() + steps, state.x_min() - steps, std::move(Ra), std::move(La));
}

inline ProbabilityDistribution probability(const WalkerState& state) {
    ProbabilityDistribution d;
    d.t = state.t();
    d.x_min = state.x_min();
    d.P.resize(state.width());
    const auto R = state.R();
    const auto L = state.L();
    for (std::size_t i = 0; i < d.P.size(); ++i) d.P[i] = std::norm(R[i]) + std::norm(L[i]);
    return d;
}

}  // namespace qwalk
