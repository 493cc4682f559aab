#pragma once

// Plane-wave eigensolutions of the walk and the exact DFT propagator.
//
// Plane waves exp[i(kx - omega_s t)] |Phi_k^(s)> solve the map with
//   omega_+(k) = omega(k) = -asin(cos(theta) sin k),   omega_-(k) = pi - omega(k)
//   |Phi_k^(+/-)> ~ col(cos(theta) cos k +/- cos(omega), exp(-ik) sin(theta)).

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qwalk/config.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/fft.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

enum class Branch : int { plus = 1, minus = -1 };

constexpr int sign(Branch b) noexcept { return static_cast<int>(b); }

inline Branch branch_from_sign(int s) {
    if (s == 1) return Branch::plus;
    if (s == -1) return Branch::minus;
    throw DomainError("branch sign must be +1 or -1, got " + std::to_string(s));
}

namespace detail {
inline void require_interior(const CoinParameter& coin, const char* what) {
    if (!coin.interior()) {
        throw DomainError(std::string(what) + ": theta must lie strictly inside (0, pi/2), got " +
                          std::to_string(coin.theta()));
    }
}
}  // namespace detail

inline double omega(double k, const CoinParameter& coin) { return -std::asin(coin.cos() * std::sin(k)); }

inline double omega(double k, const CoinParameter& coin, Branch s) {
    const double w = omega(k, coin);
    return s == Branch::plus ? w : pi - w;
}

// d^n omega / dk^n for n = 1, 2, 3 (plus branch), from the closed forms
//   w'   = -c cos k / D^{1/2}
//   w''  =  c s^2 sin k / D^{3/2}
//   w''' =  c s^2 cos k (1 + 2 c^2 sin^2 k) / D^{5/2},   D = 1 - c^2 sin^2 k.
inline double omega_derivative(double k, const CoinParameter& coin, int order) {
    detail::require_interior(coin, "omega_derivative");
    const double c = coin.cos(), s = coin.sin();
    const double sk = std::sin(k), ck = std::cos(k);
    const double D = 1.0 - c * c * sk * sk;
    switch (order) {
        case 1: return -c * ck / std::sqrt(D);
        case 2: return c * s * s * sk / (D * std::sqrt(D));
        case 3: return c * s * s * ck * (1.0 + 2.0 * c * c * sk * sk) / (D * D * std::sqrt(D));
        default: throw DomainError("omega_derivative: order must be 1, 2 or 3, got " + std::to_string(order));
    }
}

// Group velocity of branch s. The minus branch moves opposite to the plus branch.
inline double group_velocity(double k, const CoinParameter& coin, Branch s = Branch::plus) {
    return sign(s) * omega_derivative(k, coin, 1);
}

struct Eigenspinor {
    double k = 0.0;
    Branch s = Branch::plus;
    double omega_s = 0.0;
    std::array<cplx, 2> components{};

    // Amplitude <this|v>.
    cplx project(cplx r, cplx l) const noexcept {
        return std::conj(components[0]) * r + std::conj(components[1]) * l;
    }
};

inline Eigenspinor eigenspinor(double k, const CoinParameter& coin, Branch s) {
    detail::require_interior(coin, "eigenspinor");
    const double w = omega(k, coin);
    const double first = coin.cos() * std::cos(k) + sign(s) * std::cos(w);
    const cplx second = std::polar(coin.sin(), -k);
    const double n = std::sqrt(first * first + std::norm(second));
    if (n < Tolerances::eigen_degeneracy) {
        throw DegeneracyError("eigenspinor: unnormalized vector vanishes at k=" + std::to_string(k));
    }
    Eigenspinor e;
    e.k = k;
    e.s = s;
    e.omega_s = s == Branch::plus ? w : pi - w;
    e.components = {cplx{first / n, 0.0}, second / n};
    return e;
}

// Wavenumber of DFT bin m on an N-point ring, mapped to (-pi, pi].
inline double ring_wavenumber(std::size_t m, std::size_t n) {
    const auto mi = static_cast<std::int64_t>(m);
    const auto ni = static_cast<std::int64_t>(n);
    const std::int64_t j = 2 * mi > ni ? mi - ni : mi;
    return 2.0 * pi * static_cast<double>(j) / static_cast<double>(n);
}

inline std::size_t ring_index(std::int64_t x, std::size_t n) {
    const auto ni = static_cast<std::int64_t>(n);
    return static_cast<std::size_t>(((x % ni) + ni) % ni);
}

// Per-k branch amplitudes a_k^(s) = <Phi_k^(s)| Psi~_k>, Psi~_k = sum_x exp(-ikx) Psi_x.
struct SpectralDecomposition {
    double theta = 0.0;
    std::int64_t t = 0;
    std::size_t n = 0;
    std::vector<double> k;
    std::vector<cplx> a_plus;
    std::vector<cplx> a_minus;
    std::vector<Eigenspinor> phi_plus;
    std::vector<Eigenspinor> phi_minus;

    // sum_k (|a+|^2 + |a-|^2) / N; equals the state's squared norm.
    double parseval_norm2() const noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::norm(a_plus[i]) + std::norm(a_minus[i]);
        return s / static_cast<double>(n);
    }
};

inline SpectralDecomposition decompose(const WalkerState& state, const CoinParameter& coin, std::size_t n) {
    detail::require_interior(coin, "decompose");
    const auto [lo, hi] = state.support();
    const std::int64_t support_width = hi >= lo ? hi - lo + 1 : 0;
    if (n == 0 || static_cast<std::int64_t>(n) < support_width) {
        throw SizeError("decompose: ring size " + std::to_string(n) + " is smaller than the support width " +
                        std::to_string(support_width));
    }
    std::vector<cplx> R(n), L(n);
    for (std::int64_t x = lo; x <= hi; ++x) {
        R[ring_index(x, n)] = state.R_at(x);
        L[ring_index(x, n)] = state.L_at(x);
    }
    const Fft fft(n);
    fft.forward(R);
    fft.forward(L);

    SpectralDecomposition d;
    d.theta = coin.theta();
    d.t = state.t();
    d.n = n;
    d.k.resize(n);
    d.a_plus.resize(n);
    d.a_minus.resize(n);
    d.phi_plus.resize(n);
    d.phi_minus.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double k = ring_wavenumber(m, n);
        d.k[m] = k;
        d.phi_plus[m] = eigenspinor(k, coin, Branch::plus);
        d.phi_minus[m] = eigenspinor(k, coin, Branch::minus);
        d.a_plus[m] = d.phi_plus[m].project(R[m], L[m]);
        d.a_minus[m] = d.phi_minus[m].project(R[m], L[m]);
    }
    return d;
}

// Smallest ring that keeps the light cone of `state` after t steps free of wraparound.
inline std::size_t minimum_ring_size(const WalkerState& state, std::int64_t t) {
    const auto [lo, hi] = state.support();
    const std::int64_t w = hi >= lo ? hi - lo + 1 : 0;
    return static_cast<std::size_t>(w + 2 * t + 2);
}

// Psi_{x,t} = sum_s IDFT[ exp(-i omega_s t) a_k^(s) Phi_k^(s) ], returned on the
// window [x_min - t, x_max + t]. Sites outside the light cone of the initial
// support are exactly zero.
inline WalkerState exact_evolve(const WalkerState& state, const CoinParameter& coin, std::int64_t t, std::size_t n) {
    detail::require_interior(coin, "exact_evolve");
    if (t < 0) throw DomainError("exact_evolve: t must be non-negative");
    if (n < minimum_ring_size(state, t)) {
        throw SizeError("exact_evolve: ring size " + std::to_string(n) + " < support + 2t + 2 = " +
                        std::to_string(minimum_ring_size(state, t)) + " (wraparound risk)");
    }
    const SpectralDecomposition d = decompose(state, coin, n);
    std::vector<cplx> R(n), L(n);
    const auto tt = static_cast<double>(t);
    for (std::size_t m = 0; m < n; ++m) {
        const cplx cp = d.a_plus[m] * std::polar(1.0, -d.phi_plus[m].omega_s * tt);
        const cplx cm = d.a_minus[m] * std::polar(1.0, -d.phi_minus[m].omega_s * tt);
        R[m] = cp * d.phi_plus[m].components[0] + cm * d.phi_minus[m].components[0];
        L[m] = cp * d.phi_plus[m].components[1] + cm * d.phi_minus[m].components[1];
    }
    const Fft fft(n);
    fft.inverse(R);
    fft.inverse(L);

    const std::int64_t x_min = state.x_min() - t;
    const auto width = static_cast<std::size_t>(state.x_max() + t - x_min + 1);
    std::vector<cplx> outR(width), outL(width);
    const auto [lo, hi] = state.support();
    for (std::int64_t x = lo - t; x <= hi + t; ++x) {
        const auto i = static_cast<std::size_t>(x - x_min);
        outR[i] = R[ring_index(x, n)];
        outL[i] = L[ring_index(x, n)];
    }
    return WalkerState::raw(state.t() + t, x_min, std::move(outR), std::move(outL));
}

}  // namespace qwalk
