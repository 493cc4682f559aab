#pragma once

// Extended initial states Psi_{x,0} = N f_x exp(i c (x-x0)^2) exp(i k0 x) |C>.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qwalk/config.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

enum class EnvelopeFamily { delta, gaussian, sinc, sinc_gaussian, periodic };

inline std::string to_string(EnvelopeFamily f) {
    switch (f) {
        case EnvelopeFamily::delta: return "delta";
        case EnvelopeFamily::gaussian: return "gaussian";
        case EnvelopeFamily::sinc: return "sinc";
        case EnvelopeFamily::sinc_gaussian: return "sinc_gaussian";
        case EnvelopeFamily::periodic: return "periodic";
    }
    return "?";
}

inline EnvelopeFamily envelope_family_from_string(const std::string& s) {
    if (s == "delta") return EnvelopeFamily::delta;
    if (s == "gaussian") return EnvelopeFamily::gaussian;
    if (s == "sinc") return EnvelopeFamily::sinc;
    if (s == "sinc_gaussian") return EnvelopeFamily::sinc_gaussian;
    if (s == "periodic") return EnvelopeFamily::periodic;
    throw InvalidSpecError("unknown envelope family '" + s + "'");
}

struct EnvelopeSpec {
    EnvelopeFamily family = EnvelopeFamily::delta;
    double sigma0 = 0.0;  // width (gaussian, sinc, sinc_gaussian); slit width (periodic)
    double sigmaG = 0.0;  // apodizing Gaussian width (sinc_gaussian)
    double lambda = 0.0;  // period (periodic)
    double x0 = 0.0;
    std::optional<double> quad_phase;  // curvature c of exp(i c (x-x0)^2)
    std::optional<double> cutoff;      // max |x - x0| kept, sites
};

// Default half-width of the sampled sinc tail, in units of sigma0.
inline constexpr double default_sinc_cutoff_widths = 400.0;
// Default number of periods kept on each side for the periodic family.
inline constexpr double default_periodic_half_periods = 4.0;

// Apodizing widths of the shipped sinc_gaussian runs, as multiples of sigma0.
inline constexpr std::array<double, 3> preset_sigmaG_factors{1.1, 2.0, 3.0};

struct CoinSpinor {
    cplx r{1.0, 0.0};
    cplx l{0.0, 0.0};
};

struct EigenspinorSelector {
    double k0 = 0.0;
    Branch s = Branch::plus;
};

using CoinChoice = std::variant<CoinSpinor, EigenspinorSelector>;

struct InitialConditionSpec {
    EnvelopeSpec envelope;
    double carrier_k0 = 0.0;
    CoinChoice coin = CoinSpinor{};
};

inline void validate(const EnvelopeSpec& e) {
    using F = EnvelopeFamily;
    if (!std::isfinite(e.x0)) throw InvalidSpecError("x0 must be finite");
    if (e.family == F::delta) {
        if (e.x0 != std::round(e.x0)) throw InvalidSpecError("delta envelope needs an integer x0");
        return;
    }
    if (!(e.sigma0 > 0.0)) throw InvalidSpecError(to_string(e.family) + " envelope requires sigma0 > 0");
    if (e.family == F::sinc_gaussian && !(e.sigmaG > 0.0)) {
        throw InvalidSpecError("sinc_gaussian envelope requires sigmaG > 0");
    }
    if (e.family == F::periodic && !(e.lambda >= 2.0 && e.lambda == std::round(e.lambda))) {
        throw InvalidSpecError("periodic envelope requires an integer lambda >= 2");
    }
    if (e.cutoff && !(*e.cutoff >= 0.0)) throw InvalidSpecError("cutoff must be non-negative");
}

// Envelope value f(x) before truncation, carrier and normalization.
inline double envelope_value(const EnvelopeSpec& e, double x) {
    const double u = x - e.x0;
    switch (e.family) {
        case EnvelopeFamily::delta: return u == 0.0 ? 1.0 : 0.0;
        case EnvelopeFamily::gaussian: return std::exp(-0.5 * (u / e.sigma0) * (u / e.sigma0));
        case EnvelopeFamily::sinc: return sinc(u / e.sigma0);
        case EnvelopeFamily::sinc_gaussian:
            return sinc(u / e.sigma0) * std::exp(-0.5 * (u / e.sigmaG) * (u / e.sigmaG));
        case EnvelopeFamily::periodic: {
            // Gaussian grating: slits of width sigma0 at x0 + m*lambda.
            const double r = u - e.lambda * std::round(u / e.lambda);
            double acc = 0.0;
            for (int m = -3; m <= 3; ++m) {
                const double d = (r - m * e.lambda) / e.sigma0;
                acc += std::exp(-0.5 * d * d);
            }
            return acc;
        }
    }
    return 0.0;
}

// Half-width |x - x0| beyond which the envelope is dropped.
inline double resolved_cutoff(const EnvelopeSpec& e) {
    validate(e);
    // |exp(-u^2/2s^2)| < eps for |u| > s sqrt(2 ln(1/eps))
    const double gauss_k = std::sqrt(2.0 * std::log(1.0 / Tolerances::envelope_cutoff));
    double c = 0.0;
    switch (e.family) {
        case EnvelopeFamily::delta: c = 0.0; break;
        case EnvelopeFamily::gaussian: c = e.sigma0 * gauss_k; break;
        case EnvelopeFamily::sinc: c = default_sinc_cutoff_widths * e.sigma0; break;
        case EnvelopeFamily::sinc_gaussian:
            c = std::min(default_sinc_cutoff_widths * e.sigma0, e.sigmaG * gauss_k);
            break;
        case EnvelopeFamily::periodic: c = default_periodic_half_periods * e.lambda; break;
    }
    if (e.cutoff) c = std::min(c, *e.cutoff);
    return std::floor(c);
}

struct EnvelopeSamples {
    std::int64_t x_min = 0;
    std::vector<cplx> f;  // includes the quadratic phase, not the carrier
    double cutoff = 0.0;
};

// Samples the envelope on integer sites within the cutoff, trimming tails where |f| < 1e-12.
inline EnvelopeSamples envelope_samples(const EnvelopeSpec& e) {
    const double cut = resolved_cutoff(e);
    const auto lo = static_cast<std::int64_t>(std::ceil(e.x0 - cut));
    const auto hi = static_cast<std::int64_t>(std::floor(e.x0 + cut));
    EnvelopeSamples out;
    out.cutoff = cut;
    std::vector<cplx> f;
    f.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x) {
        const double xd = static_cast<double>(x);
        double v = envelope_value(e, xd);
        if (std::abs(v) < Tolerances::envelope_cutoff) v = 0.0;
        cplx z{v, 0.0};
        if (e.quad_phase && v != 0.0) {
            const double u = xd - e.x0;
            z *= std::polar(1.0, *e.quad_phase * u * u);
        }
        f.push_back(z);
    }
    std::size_t first = 0, last = f.size();
    while (first < last && f[first] == cplx{}) ++first;
    while (last > first && f[last - 1] == cplx{}) --last;
    if (first == last) throw InvalidSpecError("envelope vanishes on every lattice site");
    out.x_min = lo + static_cast<std::int64_t>(first);
    out.f.assign(f.begin() + static_cast<std::ptrdiff_t>(first), f.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
}

inline CoinSpinor resolve_coin(const CoinChoice& choice, const CoinParameter& coin) {
    if (const auto* sel = std::get_if<EigenspinorSelector>(&choice)) {
        const Eigenspinor e = eigenspinor(sel->k0, coin, sel->s);
        return {e.components[0], e.components[1]};
    }
    const auto& c = std::get<CoinSpinor>(choice);
    const double n = std::sqrt(std::norm(c.r) + std::norm(c.l));
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidSpecError("coin spinor must be nonzero");
    return {c.r / n, c.l / n};
}

inline WalkerState build(const InitialConditionSpec& spec, const CoinParameter& coin) {
    if (!(spec.carrier_k0 >= -pi && spec.carrier_k0 <= pi)) {
        throw InvalidSpecError("carrier_k0 must lie in [-pi, pi]");
    }
    const EnvelopeSamples env = envelope_samples(spec.envelope);
    const CoinSpinor c = resolve_coin(spec.coin, coin);
    std::vector<cplx> R(env.f.size()), L(env.f.size());
    for (std::size_t i = 0; i < env.f.size(); ++i) {
        const auto x = static_cast<double>(env.x_min + static_cast<std::int64_t>(i));
        const cplx a = env.f[i] * std::polar(1.0, spec.carrier_k0 * x);
        R[i] = a * c.r;
        L[i] = a * c.l;
    }
    return WalkerState::from_amplitudes(env.x_min, std::move(R), std::move(L), true);
}

struct BranchWeights {
    double plus = 0.0;
    double minus = 0.0;
};

inline BranchWeights branch_weights(const CoinSpinor& c, double k0, const CoinParameter& coin) {
    const double n2 = std::norm(c.r) + std::norm(c.l);
    if (!(n2 > 0.0)) throw InvalidSpecError("branch_weights: zero coin spinor");
    const Eigenspinor p = eigenspinor(k0, coin, Branch::plus);
    const Eigenspinor m = eigenspinor(k0, coin, Branch::minus);
    return {std::norm(p.project(c.r, c.l)) / n2, std::norm(m.project(c.r, c.l)) / n2};
}

// Weights |<Phi_{k0}^(s)|C>|^2 of the site-uniform coin part of `state`.
inline BranchWeights branch_weights(const WalkerState& state, double k0, const CoinParameter& coin) {
    detail::require_interior(coin, "branch_weights");
    const auto R = state.R();
    const auto L = state.L();
    std::size_t best = 0;
    double best_n = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) {
        const double n = std::norm(R[i]) + std::norm(L[i]);
        if (n > best_n) {
            best_n = n;
            best = i;
        }
    }
    if (!(best_n > 0.0)) throw InvalidSpecError("branch_weights: zero state");
    const double inv = 1.0 / std::sqrt(best_n);
    const CoinSpinor c{R[best] * inv, L[best] * inv};
    // Every site must be parallel to c: the 2x2 determinant vanishes.
    for (std::size_t i = 0; i < R.size(); ++i) {
        const double site = std::sqrt(std::norm(R[i]) + std::norm(L[i]));
        if (std::abs(R[i] * c.l - L[i] * c.r) > 1e-10 * std::max(site, 1e-300)) {
            throw InvalidSpecError("branch_weights: coin part of the state is not site-uniform");
        }
    }
    return branch_weights(c, k0, coin);
}

}  // namespace qwalk
