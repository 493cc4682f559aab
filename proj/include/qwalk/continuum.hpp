#pragma once

// Envelope dynamics around a carrier k0. Writing the walk as
//   Psi^(s)_{x,t} ~ exp[i(k0 x - omega_s(k0) t)] F_s(x,t) |Phi_{k0}^(s)>,
// each envelope evolves in Fourier space as F~_s(K,t) = F~_s(K,0) exp(-i s Omega(K) t)
// with Omega(K) = omega(k0+K) - omega(k0), optionally replaced by its Taylor
// polynomial (advection, paraxial, third-order).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/config.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/fft.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

inline double sinc(double u) {
    if (u == 0.0) return 1.0;
    const double a = pi * u;
    return std::sin(a) / a;
}

// Complex envelope sampled at x_j = x_start + j*h.
struct EnvelopeField {
    double x_start = 0.0;
    double h = 1.0;
    std::vector<cplx> values;
    double k0 = 0.0;
    Branch s = Branch::plus;
    double time = 0.0;

    std::size_t size() const noexcept { return values.size(); }
    double x(std::size_t j) const noexcept { return x_start + static_cast<double>(j) * h; }

    double norm2() const noexcept {
        double acc = 0.0;
        for (const auto& v : values) acc += std::norm(v);
        return acc * h;
    }

    std::vector<double> intensity() const {
        std::vector<double> out(values.size());
        std::transform(values.begin(), values.end(), out.begin(), [](cplx v) { return std::norm(v); });
        return out;
    }

    void normalize() {
        const double n2 = norm2();
        if (!(n2 > 0.0)) throw InvalidSpecError("cannot normalize a zero envelope");
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& v : values) v *= inv;
    }
};

enum class Truncation { first = 1, second = 2, third = 3, exact = 0 };

inline std::string to_string(Truncation t) {
    switch (t) {
        case Truncation::first: return "1";
        case Truncation::second: return "2";
        case Truncation::third: return "3";
        case Truncation::exact: return "exact";
    }
    return "?";
}

inline Truncation truncation_from_string(const std::string& s) {
    if (s == "1") return Truncation::first;
    if (s == "2") return Truncation::second;
    if (s == "3") return Truncation::third;
    if (s == "exact") return Truncation::exact;
    throw InvalidSpecError("truncation must be one of 1, 2, 3, exact; got '" + s + "'");
}

enum class Boundary { absorbing, periodic };

// Omega(K) for the requested truncation.
class EnvelopeDispersion {
public:
    EnvelopeDispersion(double k0, const CoinParameter& coin, Truncation trunc)
        : k0_(k0), coin_(coin), trunc_(trunc) {
        detail::require_interior(coin, "envelope dispersion");
        w0_ = omega(k0, coin);
        for (int n = 1; n <= 3; ++n) wn_[n - 1] = omega_derivative(k0, coin, n);
    }

    double operator()(double K) const {
        switch (trunc_) {
            case Truncation::first: return wn_[0] * K;
            case Truncation::second: return wn_[0] * K + 0.5 * wn_[1] * K * K;
            case Truncation::third: return wn_[0] * K + 0.5 * wn_[1] * K * K + wn_[2] * K * K * K / 6.0;
            case Truncation::exact: return omega(k0_ + K, coin_) - w0_;
        }
        return 0.0;
    }

    // Taylor coefficients omega_n at k0 (n = 1..3).
    double coefficient(int n) const { return wn_.at(static_cast<std::size_t>(n - 1)); }

private:
    double k0_;
    CoinParameter coin_;
    Truncation trunc_;
    double w0_ = 0.0;
    std::array<double, 3> wn_{};
};

namespace detail {
inline double edge_amplitude(const EnvelopeField& f) {
    if (f.values.empty()) return 0.0;
    return std::max(std::abs(f.values.front()), std::abs(f.values.back()));
}
}  // namespace detail

// Advances the envelope by dt with the spectral multiplier exp(-i s Omega(K) dt).
// With absorbing boundaries the field must stay below the leak threshold at both
// grid edges before and after the step; periodic boundaries treat the grid as a ring.
inline EnvelopeField propagate_envelope(const EnvelopeField& field, const CoinParameter& coin, double dt,
                                        Truncation trunc, Boundary boundary = Boundary::absorbing) {
    if (!(dt >= 0.0)) throw DomainError("propagate_envelope: dt must be non-negative");
    if (field.values.empty()) throw SizeError("propagate_envelope: empty field");
    if (!(field.h > 0.0)) throw DomainError("propagate_envelope: grid spacing must be positive");
    if (boundary == Boundary::absorbing && detail::edge_amplitude(field) > Tolerances::boundary_leak) {
        throw BoundaryLeakError("propagate_envelope: input field is populated at the grid edges");
    }
    EnvelopeField out = field;
    out.time = field.time + dt;
    if (dt == 0.0) return out;

    const EnvelopeDispersion Omega(field.k0, coin, trunc);
    const std::size_t n = field.size();
    const Fft fft(n);
    fft.forward(out.values);
    const double s = sign(field.s);
    for (std::size_t m = 0; m < n; ++m) {
        const double K = ring_wavenumber(m, n) / field.h;
        out.values[m] *= std::polar(1.0, -s * Omega(K) * dt);
    }
    fft.inverse(out.values);

    if (boundary == Boundary::absorbing && detail::edge_amplitude(out) > Tolerances::boundary_leak) {
        throw BoundaryLeakError("propagate_envelope: field reached the grid edges after dt=" + std::to_string(dt) +
                                "; enlarge the grid");
    }
    return out;
}

// w(t) = sqrt(1 + (t / (sigma0^2 tan theta))^2): width of |F|^2 relative to its
// initial width for a Gaussian under the paraxial equation.
inline double width_law(double t, double sigma0, const CoinParameter& coin) {
    if (!(sigma0 > 0.0)) throw DomainError("width_law: sigma0 must be positive");
    detail::require_interior(coin, "width_law");
    const double a = t / (sigma0 * sigma0 * coin.tan());
    return std::sqrt(1.0 + a * a);
}

struct GaussianWidthLaw {
    double sigma0;
    double theta;

    // q_s(t) = sqrt(1 + i s t / (sigma0^2 tan theta))
    cplx q(double t, Branch s) const {
        return std::sqrt(cplx{1.0, sign(s) * t / (sigma0 * sigma0 * std::tan(theta))});
    }
    double w(double t) const { return width_law(t, sigma0, CoinParameter(theta)); }
};

struct GridSpec {
    double x_start = 0.0;
    std::size_t count = 0;
    double h = 1.0;
};

// Closed-form Gaussian solution of the paraxial equation at k0 = pi/2:
//   F_s(x,t) = A / q_s(t) * exp[-(x - x0)^2 / (2 (sigma0 q_s)^2)],
// with A fixed by the t=0 grid normalization.
inline EnvelopeField gaussian_envelope_analytic(double sigma0, double x0, const CoinParameter& coin, Branch s,
                                                double t, const GridSpec& grid) {
    if (!(sigma0 > 0.0)) throw DomainError("gaussian_envelope_analytic: sigma0 must be positive");
    detail::require_interior(coin, "gaussian_envelope_analytic");
    if (grid.count == 0 || !(grid.h > 0.0)) throw SizeError("gaussian_envelope_analytic: invalid grid");

    EnvelopeField f;
    f.x_start = grid.x_start;
    f.h = grid.h;
    f.k0 = pi / 2;
    f.s = s;
    f.time = t;
    f.values.resize(grid.count);

    double a2 = 0.0;
    for (std::size_t j = 0; j < grid.count; ++j) {
        const double u = (f.x(j) - x0) / sigma0;
        a2 += std::exp(-u * u) * grid.h;
    }
    const double A = 1.0 / std::sqrt(a2);
    const cplx q = GaussianWidthLaw{sigma0, coin.theta()}.q(t, s);
    const cplx q2 = q * q;
    for (std::size_t j = 0; j < grid.count; ++j) {
        const double d = f.x(j) - x0;
        f.values[j] = A / q * std::exp(-d * d / (2.0 * sigma0 * sigma0 * q2));
    }
    return f;
}

// Stationary-phase far field of a sinc(x/sigma0) envelope: a rect of width
// w = 2 pi t / (sigma0 tan theta) and height 1/w.
struct FlatTopPrediction {
    double sigma0 = 0.0;
    double theta = 0.0;
    double t = 0.0;
    double w = 0.0;
    double level = 0.0;
    double std = 0.0;
    double transient_time = 0.0;  // 2 sigma0^2 tan(theta)
    bool asymptotic = false;      // t >= transient_time
};

inline FlatTopPrediction flat_top_prediction(double sigma0, const CoinParameter& coin, double t) {
    if (!(sigma0 > 0.0)) throw DomainError("flat_top_prediction: sigma0 must be positive");
    detail::require_interior(coin, "flat_top_prediction");
    FlatTopPrediction p;
    p.sigma0 = sigma0;
    p.theta = coin.theta();
    p.t = t;
    p.w = 2.0 * pi * t / (sigma0 * coin.tan());
    p.level = p.w > 0.0 ? 1.0 / p.w : 0.0;
    p.std = p.w / std::sqrt(12.0);
    p.transient_time = 2.0 * sigma0 * sigma0 * coin.tan();
    p.asymptotic = t >= p.transient_time;
    return p;
}

struct SincSpectrum {
    double sigma0 = 0.0;
    std::size_t n = 0;
    double passband_edge = 0.0;      // pi / sigma0
    double inband_ripple = 0.0;      // relative std of |f~| over |k| < 0.9 * edge
    double out_of_band_fraction = 0.0;
};

// DFT of sinc(x/sigma0) sampled at integers x in [-n/2, n/2).
inline SincSpectrum sinc_spectrum_check(double sigma0, std::size_t n = 4096) {
    if (!(sigma0 >= 2.0)) throw DomainError("sinc_spectrum_check: sigma0 must be >= 2");
    if (n < 16) throw SizeError("sinc_spectrum_check: n must be >= 16");
    std::vector<cplx> f(n);
    const auto half = static_cast<std::int64_t>(n / 2);
    for (std::int64_t x = -half; x < static_cast<std::int64_t>(n) - half; ++x) {
        f[ring_index(x, n)] = sinc(static_cast<double>(x) / sigma0);
    }
    Fft(n).forward(f);

    SincSpectrum r;
    r.sigma0 = sigma0;
    r.n = n;
    r.passband_edge = pi / sigma0;
    double e_in = 0.0, e_total = 0.0, sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < n; ++m) {
        const double k = std::abs(ring_wavenumber(m, n));
        const double e = std::norm(f[m]);
        e_total += e;
        if (k < r.passband_edge) e_in += e;
        if (k < 0.9 * r.passband_edge) {
            const double a = std::abs(f[m]);
            sum += a;
            sum2 += a * a;
            ++count;
        }
    }
    r.out_of_band_fraction = (e_total - e_in) / e_total;
    if (count > 0) {
        const double mean = sum / static_cast<double>(count);
        const double var = std::max(0.0, sum2 / static_cast<double>(count) - mean * mean);
        r.inband_ripple = std::sqrt(var) / mean;
    }
    return r;
}

// T = lambda^2 tan(theta) / (2 pi).
//
// Every Fourier harmonic 2 pi n / lambda of a lambda-periodic envelope picks up
// the paraxial phase pi n^2 over one T, so |F(x,T)|^2 = |F(x + lambda/2, 0)|^2 and
// the unshifted image returns at 2T.
inline double talbot_period(double lambda, const CoinParameter& coin) {
    if (!(lambda > 0.0)) throw DomainError("talbot_period: lambda must be positive");
    detail::require_interior(coin, "talbot_period");
    return lambda * lambda * coin.tan() / (2.0 * pi);
}

}  // namespace qwalk
