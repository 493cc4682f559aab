#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/config.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
    double total = 0.0;
};

inline Moments moments(const ProbabilityDistribution& dist) {
    Moments m;
    m.total = dist.total();
    if (!(m.total > 0.0)) throw EmptyDistributionError("moments: distribution has no mass");
    // Positions are taken relative to x_min so the sums stay translation covariant.
    double s1 = 0.0;
    for (std::size_t i = 0; i < dist.P.size(); ++i) s1 += static_cast<double>(i) * dist.P[i];
    const double rel_mean = s1 / m.total;
    double s2 = 0.0;
    for (std::size_t i = 0; i < dist.P.size(); ++i) {
        const double d = static_cast<double>(i) - rel_mean;
        s2 += d * d * dist.P[i];
    }
    m.mean = static_cast<double>(dist.x_min) + rel_mean;
    m.std = std::sqrt(std::max(0.0, s2 / m.total));
    return m;
}

// True iff every site with x + t odd is empty (below the parity noise floor).
inline bool parity_zeros(const ProbabilityDistribution& dist, std::int64_t t) {
    for (std::size_t i = 0; i < dist.P.size(); ++i) {
        const std::int64_t x = dist.x_min + static_cast<std::int64_t>(i);
        if (((x + t) % 2 + 2) % 2 == 1 && dist.P[i] >= Tolerances::parity_zero) return false;
    }
    return true;
}

struct FlatnessReport {
    double predicted_w = 0.0;
    double plateau_window = 0.0;  // rho
    double center = 0.0;
    double plateau_mean = 0.0;
    std::optional<double> ripple_rms;  // absent before the transient time
    double level_error = 0.0;
    double edge_sharpness = 0.0;
    double measured_width = 0.0;  // outermost half-plateau crossings
};

namespace detail {

// First position (scanning from the left) where P reaches `level`, linearly
// interpolated with the preceding site.
inline double left_crossing(const ProbabilityDistribution& d, double level) {
    for (std::size_t i = 0; i < d.P.size(); ++i) {
        if (d.P[i] >= level) {
            const double x = static_cast<double>(d.x_min + static_cast<std::int64_t>(i));
            if (i == 0) return x;
            const double p0 = d.P[i - 1], p1 = d.P[i];
            return x - 1.0 + (level - p0) / (p1 - p0);
        }
    }
    return static_cast<double>(d.x_max());
}

inline double right_crossing(const ProbabilityDistribution& d, double level) {
    for (std::size_t r = d.P.size(); r-- > 0;) {
        if (d.P[r] >= level) {
            const double x = static_cast<double>(d.x_min + static_cast<std::int64_t>(r));
            if (r + 1 == d.P.size()) return x;
            const double p0 = d.P[r + 1], p1 = d.P[r];
            return x + 1.0 - (level - p0) / (p1 - p0);
        }
    }
    return static_cast<double>(d.x_min);
}

}  // namespace detail

// Compares a distribution to the flat-top prediction over the central rho*w
// window around the distribution mean.
inline FlatnessReport flatness(const ProbabilityDistribution& dist, const FlatTopPrediction& prediction,
                               double rho = 0.8) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("flatness: rho must lie in (0, 1]");
    if (!(prediction.w > 0.0)) throw DomainError("flatness: predicted width must be positive");
    FlatnessReport r;
    r.predicted_w = prediction.w;
    r.plateau_window = rho;
    r.center = moments(dist).mean;
    const double half = 0.5 * rho * prediction.w;
    const auto lo = static_cast<std::int64_t>(std::ceil(r.center - half));
    const auto hi = static_cast<std::int64_t>(std::floor(r.center + half));
    if (lo < dist.x_min || hi > dist.x_max() || hi < lo) {
        throw WindowError("flatness: plateau window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] exceeds the distribution support");
    }
    const auto i0 = static_cast<std::size_t>(lo - dist.x_min);
    const auto i1 = static_cast<std::size_t>(hi - dist.x_min);
    const auto count = static_cast<double>(i1 - i0 + 1);

    // Mean as min + mean(P - min): identical samples give exactly their value.
    const double pmin = *std::min_element(dist.P.begin() + static_cast<std::ptrdiff_t>(i0),
                                          dist.P.begin() + static_cast<std::ptrdiff_t>(i1 + 1));
    double acc = 0.0;
    for (std::size_t i = i0; i <= i1; ++i) acc += dist.P[i] - pmin;
    r.plateau_mean = pmin + acc / count;
    if (!(r.plateau_mean > 0.0)) throw WindowError("flatness: plateau window carries no probability");

    if (prediction.asymptotic) {
        double sq = 0.0;
        for (std::size_t i = i0; i <= i1; ++i) {
            const double d = (dist.P[i] - r.plateau_mean) / r.plateau_mean;
            sq += d * d;
        }
        r.ripple_rms = std::sqrt(sq / count);
    }
    r.level_error = std::abs(r.plateau_mean - prediction.level) / prediction.level;

    const double pm = r.plateau_mean;
    r.measured_width = detail::right_crossing(dist, 0.5 * pm) - detail::left_crossing(dist, 0.5 * pm);
    const double left = std::abs(detail::left_crossing(dist, 0.9 * pm) - detail::left_crossing(dist, 0.1 * pm));
    const double right = std::abs(detail::right_crossing(dist, 0.1 * pm) - detail::right_crossing(dist, 0.9 * pm));
    r.edge_sharpness = 0.5 * (left + right);
    return r;
}

// P_x = prediction.level on sites with |x - center| < w/2, zero elsewhere.
inline ProbabilityDistribution rect_profile(const FlatTopPrediction& prediction, double center, std::int64_t t = 0) {
    const double half = 0.5 * prediction.w;
    const auto lo = static_cast<std::int64_t>(std::floor(center - half)) - 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(center + half)) + 1;
    ProbabilityDistribution d;
    d.t = t;
    d.x_min = lo;
    d.P.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x) {
        if (std::abs(static_cast<double>(x) - center) < half) d.P[static_cast<std::size_t>(x - lo)] = prediction.level;
    }
    return d;
}

struct PacketFit {
    double velocity = 0.0;   // sites per step, least-squares slope
    double intercept = 0.0;
    double residual_rms = 0.0;
    double mean_mass = 0.0;
    std::vector<double> centroids;
    std::vector<double> masses;
};

struct PacketTrack {
    std::vector<std::int64_t> times;
    std::vector<PacketFit> packets;  // ordered left to right
};

namespace detail {

struct PacketSplit {
    std::vector<double> centroids;
    std::vector<double> masses;
};

// Splits a distribution into packets: runs of P >= 10% of the peak, separated
// at the minimum between consecutive runs.
inline PacketSplit split_packets(const ProbabilityDistribution& d) {
    if (d.P.empty()) throw EmptyDistributionError("track_packets: empty distribution");
    const double peak = *std::max_element(d.P.begin(), d.P.end());
    if (!(peak > 0.0)) throw EmptyDistributionError("track_packets: distribution has no mass");
    const double thr = 0.1 * peak;
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t i = 0; i < d.P.size();) {
        if (d.P[i] >= thr) {
            std::size_t j = i;
            while (j + 1 < d.P.size() && d.P[j + 1] >= thr) ++j;
            runs.emplace_back(i, j);
            i = j + 1;
        } else {
            ++i;
        }
    }
    if (runs.size() > 2) {
        throw NotSeparableError("track_packets: found " + std::to_string(runs.size()) +
                                " runs above 10% of the peak; expected one or two packets");
    }
    std::vector<std::size_t> bounds{0};
    for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
        const auto first = d.P.begin() + static_cast<std::ptrdiff_t>(runs[r].second);
        const auto last = d.P.begin() + static_cast<std::ptrdiff_t>(runs[r + 1].first + 1);
        bounds.push_back(static_cast<std::size_t>(std::min_element(first, last) - d.P.begin()));
    }
    bounds.push_back(d.P.size());

    PacketSplit out;
    for (std::size_t r = 0; r + 1 < bounds.size(); ++r) {
        double m = 0.0, mx = 0.0;
        for (std::size_t i = bounds[r]; i < bounds[r + 1]; ++i) {
            m += d.P[i];
            mx += static_cast<double>(d.x_min + static_cast<std::int64_t>(i)) * d.P[i];
        }
        out.masses.push_back(m);
        out.centroids.push_back(mx / m);
    }
    return out;
}

}  // namespace detail

// Least-squares centroid velocity of each packet over a time series.
inline PacketTrack track_packets(const std::vector<ProbabilityDistribution>& series) {
    if (series.size() < 2) throw DomainError("track_packets: need at least two time samples");
    std::vector<detail::PacketSplit> splits;
    for (const auto& d : series) splits.push_back(detail::split_packets(d));
    const std::size_t np = splits.front().centroids.size();
    for (const auto& s : splits) {
        if (s.centroids.size() != np) {
            throw NotSeparableError("track_packets: packet count changes across time samples");
        }
    }
    PacketTrack track;
    for (const auto& d : series) track.times.push_back(d.t);
    const auto n = static_cast<double>(series.size());
    double tm = 0.0;
    for (auto t : track.times) tm += static_cast<double>(t);
    tm /= n;
    double stt = 0.0;
    for (auto t : track.times) stt += (static_cast<double>(t) - tm) * (static_cast<double>(t) - tm);
    if (!(stt > 0.0)) throw DomainError("track_packets: time samples must not all coincide");

    for (std::size_t p = 0; p < np; ++p) {
        PacketFit fit;
        double cm = 0.0, mm = 0.0;
        for (const auto& s : splits) {
            fit.centroids.push_back(s.centroids[p]);
            fit.masses.push_back(s.masses[p]);
            cm += s.centroids[p];
            mm += s.masses[p];
        }
        cm /= n;
        fit.mean_mass = mm / n;
        double stc = 0.0;
        for (std::size_t i = 0; i < splits.size(); ++i) {
            stc += (static_cast<double>(track.times[i]) - tm) * (fit.centroids[i] - cm);
        }
        fit.velocity = stc / stt;
        fit.intercept = cm - fit.velocity * tm;
        double res = 0.0;
        for (std::size_t i = 0; i < splits.size(); ++i) {
            const double e = fit.centroids[i] - (fit.intercept + fit.velocity * static_cast<double>(track.times[i]));
            res += e * e;
        }
        fit.residual_rms = std::sqrt(res / n);
        track.packets.push_back(std::move(fit));
    }
    return track;
}

enum class Metric { L1, Linf };

inline Metric metric_from_string(const std::string& s) {
    if (s == "L1" || s == "l1") return Metric::L1;
    if (s == "Linf" || s == "linf" || s == "Linfinity") return Metric::Linf;
    throw InvalidSpecError("metric must be L1 or Linf, got '" + s + "'");
}

inline std::string to_string(Metric m) { return m == Metric::L1 ? "L1" : "Linf"; }

// Distance over the union of both windows, treating missing sites as zero.
inline double distance(const ProbabilityDistribution& a, const ProbabilityDistribution& b, Metric metric) {
    if (a.P.empty() && b.P.empty()) return 0.0;
    const std::int64_t lo = a.P.empty() ? b.x_min : (b.P.empty() ? a.x_min : std::min(a.x_min, b.x_min));
    const std::int64_t hi = a.P.empty() ? b.x_max() : (b.P.empty() ? a.x_max() : std::max(a.x_max(), b.x_max()));
    double acc = 0.0;
    for (std::int64_t x = lo; x <= hi; ++x) {
        const double d = std::abs(a.at(x) - b.at(x));
        acc = metric == Metric::L1 ? acc + d : std::max(acc, d);
    }
    return acc;
}

}  // namespace qwalk
