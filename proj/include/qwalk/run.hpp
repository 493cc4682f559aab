#pragma once

// Command implementations shared by the CLI and the acceptance suite.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/analysis.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/initcond.hpp"
#include "qwalk/io.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

// One sampled time of a run: the distribution plus the state when the engine
// tracks amplitudes (map, spectral).
struct Sample {
    ProbabilityDistribution dist;
    std::optional<WalkerState> state;
};

struct EngineRun {
    std::vector<Sample> samples;  // in the order of config.sample_times
    json provenance;
};

namespace detail {

inline std::vector<Sample> run_map(const RunConfig& cfg, const WalkerState& init, const CoinParameter& coin) {
    std::vector<std::int64_t> order = cfg.sample_times;
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    std::map<std::int64_t, WalkerState> at;
    WalkerState cur = init;
    for (auto t : order) {
        cur = evolve(cur, coin, t - cur.t());
        at.emplace(t, cur);
    }
    std::vector<Sample> out;
    for (auto t : cfg.sample_times) {
        const WalkerState& s = at.at(t);
        out.push_back({probability(s), s});
    }
    return out;
}

inline std::vector<Sample> run_spectral(const RunConfig& cfg, const WalkerState& init, const CoinParameter& coin,
                                        std::size_t ring) {
    std::vector<Sample> out;
    for (auto t : cfg.sample_times) {
        WalkerState s = exact_evolve(init, coin, t, ring);
        out.push_back({probability(s), std::move(s)});
    }
    return out;
}

// Site-sampled sum_s |F_s|^2 with F_s(x,0) = f_x <Phi_{k0}^(s)|C>.
inline std::vector<Sample> run_continuum(const RunConfig& cfg, const CoinParameter& coin, std::size_t& grid_size) {
    const EnvelopeSamples env = envelope_samples(cfg.initial.envelope);
    const CoinSpinor c = resolve_coin(cfg.initial.coin, coin);
    const double k0 = cfg.initial.carrier_k0;

    const auto width = static_cast<std::int64_t>(env.f.size());
    const std::size_t n = good_fft_size(static_cast<std::size_t>(width + 2 * cfg.t_max + 2 + 64));
    grid_size = n;
    const std::int64_t margin = (static_cast<std::int64_t>(n) - width) / 2;
    const std::int64_t x_start = env.x_min - margin;

    double n2 = 0.0;
    for (const auto& v : env.f) n2 += std::norm(v);
    const double inv = 1.0 / std::sqrt(n2);

    std::vector<EnvelopeField> fields;
    for (Branch s : {Branch::plus, Branch::minus}) {
        const cplx proj = eigenspinor(k0, coin, s).project(c.r, c.l);
        EnvelopeField f;
        f.x_start = static_cast<double>(x_start);
        f.h = 1.0;
        f.k0 = k0;
        f.s = s;
        f.values.assign(n, cplx{});
        for (std::size_t i = 0; i < env.f.size(); ++i) f.values[static_cast<std::size_t>(margin) + i] = env.f[i] * inv * proj;
        fields.push_back(std::move(f));
    }

    std::vector<Sample> out;
    for (auto t : cfg.sample_times) {
        ProbabilityDistribution d;
        d.t = t;
        d.x_min = x_start;
        d.P.assign(n, 0.0);
        for (const auto& f : fields) {
            if (std::all_of(f.values.begin(), f.values.end(), [](cplx v) { return v == cplx{}; })) continue;
            const EnvelopeField g = propagate_envelope(f, coin, static_cast<double>(t), *cfg.truncation);
            for (std::size_t i = 0; i < n; ++i) d.P[i] += std::norm(g.values[i]);
        }
        out.push_back({std::move(d), std::nullopt});
    }
    return out;
}

}  // namespace detail

inline EngineRun run_engine(const RunConfig& cfg) {
    validate(cfg);
    const CoinParameter coin(cfg.theta);
    EngineRun run;
    run.provenance = {{"engine", to_string(cfg.engine)}};
    run.provenance["cutoff"] = resolved_cutoff(cfg.initial.envelope);
    switch (cfg.engine) {
        case Engine::map: {
            run.samples = detail::run_map(cfg, build(cfg.initial, coin), coin);
            break;
        }
        case Engine::spectral: {
            const WalkerState init = build(cfg.initial, coin);
            const std::size_t ring = cfg.ring_size.value_or(good_fft_size(minimum_ring_size(init, cfg.t_max)));
            run.provenance["ring_size"] = ring;
            run.samples = detail::run_spectral(cfg, init, coin, ring);
            break;
        }
        case Engine::continuum: {
            std::size_t n = 0;
            run.samples = detail::run_continuum(cfg, coin, n);
            run.provenance["grid_size"] = n;
            run.provenance["truncation"] = to_string(*cfg.truncation);
            break;
        }
    }
    return run;
}

// k, omega, vg on `samples` points uniformly covering [-pi, pi] (both ends included).
inline std::string dispersion_csv(double theta, std::size_t samples) {
    if (samples < 16) throw DomainError("dispersion: samples must be >= 16");
    const CoinParameter coin(theta);
    detail::require_interior(coin, "dispersion");
    std::ostringstream out;
    out << "k,omega,vg\n";
    for (std::size_t j = 0; j < samples; ++j) {
        const double k = -pi + 2.0 * pi * static_cast<double>(j) / static_cast<double>(samples - 1);
        out << format_double(k) << ',' << format_double(omega(k, coin)) << ','
            << format_double(omega_derivative(k, coin, 1)) << '\n';
    }
    return out.str();
}

namespace detail {
inline std::string sample_file_name(std::int64_t t) { return "dist_t" + std::to_string(t) + ".csv"; }
}  // namespace detail

// Runs the configured engine, writes distribution CSVs and result.json under
// config.output_path, and returns the ResultRecord.
inline json simulate(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const EngineRun run = run_engine(cfg);
    const std::filesystem::path dir(cfg.output_path);
    std::filesystem::create_directories(dir);

    json record;
    record["config"] = to_json(cfg);
    record["provenance"] = run.provenance;
    json samples = json::array();
    std::vector<ProbabilityDistribution> series;
    const CoinParameter coin(cfg.theta);
    const EnvelopeSpec& env = cfg.initial.envelope;
    const bool flat_family = env.family == EnvelopeFamily::sinc || env.family == EnvelopeFamily::sinc_gaussian;

    for (const auto& s : run.samples) {
        json entry{{"t", s.dist.t}, {"x_min", s.dist.x_min}, {"x_max", s.dist.x_max()}, {"rows", s.dist.size()}};
        if (cfg.wants(Output::distribution)) {
            const auto name = detail::sample_file_name(s.dist.t);
            write_distribution_csv(dir / name, s.dist, s.state ? &*s.state : nullptr);
            entry["file"] = name;
        }
        if (cfg.wants(Output::moments)) entry["moments"] = to_json(moments(s.dist));
        if (cfg.wants(Output::flatness)) {
            if (!flat_family) {
                entry["flatness"] = error_json("config", "flatness needs a sinc or sinc_gaussian envelope");
            } else if (!coin.interior() || s.dist.t == 0) {
                entry["flatness"] = error_json("domain", "no flat-top prediction at t=0 or at theta endpoints");
            } else {
                const auto pred = flat_top_prediction(env.sigma0, coin, static_cast<double>(s.dist.t));
                json f;
                f["prediction"] = to_json(pred);
                try {
                    f["report"] = to_json(flatness(s.dist, pred, cfg.flatness_rho));
                } catch (const Error& e) {
                    f["report"] = error_json(e.kind(), e.what());
                }
                entry["flatness"] = f;
            }
        }
        series.push_back(s.dist);
        samples.push_back(entry);
    }
    record["samples"] = samples;
    if (cfg.wants(Output::packets)) {
        try {
            record["packets"] = to_json(track_packets(series));
        } catch (const Error& e) {
            record["packets"] = error_json(e.kind(), e.what());
        }
    }
    if (cfg.wants(Output::dispersion)) {
        std::ofstream(dir / "dispersion.csv") << dispersion_csv(cfg.theta, cfg.dispersion_samples);
        record["dispersion_file"] = "dispersion.csv";
    }
    const auto t1 = std::chrono::steady_clock::now();
    record["timing"] = {{"wall_seconds", std::chrono::duration<double>(t1 - t0).count()}};
    std::ofstream(dir / "result.json") << record.dump(2) << '\n';
    return record;
}

// Runs every config; with parallel=true each run gets its own task. Output
// paths must be distinct.
inline std::vector<json> simulate_all(const std::vector<RunConfig>& runs, bool parallel) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = i + 1; j < runs.size(); ++j) {
            if (std::filesystem::path(runs[i].output_path).lexically_normal() ==
                std::filesystem::path(runs[j].output_path).lexically_normal()) {
                throw ConfigError("runs " + std::to_string(i) + " and " + std::to_string(j) + " share output_path '" +
                                  runs[i].output_path + "'");
            }
        }
    }
    std::vector<json> out;
    if (!parallel) {
        for (const auto& r : runs) out.push_back(simulate(r));
        return out;
    }
    std::vector<std::future<json>> futures;
    for (const auto& r : runs) futures.push_back(std::async(std::launch::async, [&r] { return simulate(r); }));
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

enum class PredictionKind { gaussian_width, flat_top, talbot };

inline PredictionKind prediction_kind_from_string(const std::string& s) {
    if (s == "gaussian-width") return PredictionKind::gaussian_width;
    if (s == "flat-top") return PredictionKind::flat_top;
    if (s == "talbot") return PredictionKind::talbot;
    throw DomainError("prediction kind must be gaussian-width, flat-top or talbot; got '" + s + "'");
}

struct PredictParams {
    double theta = pi / 4;
    std::optional<double> t;
    std::optional<double> sigma0;
    std::optional<double> lambda;
};

inline json predict(PredictionKind kind, const PredictParams& p) {
    const CoinParameter coin(p.theta);
    auto need = [](const std::optional<double>& v, const char* name) {
        if (!v) throw DomainError(std::string("predict: missing parameter --") + name);
        return *v;
    };
    switch (kind) {
        case PredictionKind::gaussian_width: {
            const double t = need(p.t, "t"), s0 = need(p.sigma0, "sigma0");
            return {{"kind", "gaussian-width"}, {"theta", p.theta}, {"t", t}, {"sigma0", s0},
                    {"w", width_law(t, s0, coin)}, {"asymptotic_slope", 1.0 / (s0 * s0 * coin.tan())}};
        }
        case PredictionKind::flat_top: {
            const double t = need(p.t, "t"), s0 = need(p.sigma0, "sigma0");
            json j = to_json(flat_top_prediction(s0, coin, t));
            j["kind"] = "flat-top";
            return j;
        }
        case PredictionKind::talbot: {
            const double lam = need(p.lambda, "lambda");
            return {{"kind", "talbot"}, {"theta", p.theta}, {"lambda", lam}, {"T", talbot_period(lam, coin)}};
        }
    }
    return {};
}

inline json compare(const std::filesystem::path& a, const std::filesystem::path& b, Metric metric) {
    const auto fa = read_distribution_csv(a);
    const auto fb = read_distribution_csv(b);
    json j{{"metric", to_string(metric)},
           {"distance", distance(fa.dist, fb.dist, metric)},
           {"file_a", {{"path", a.string()}, {"norm", fa.dist.total()}, {"rows", fa.dist.size()}}},
           {"file_b", {{"path", b.string()}, {"norm", fb.dist.total()}, {"rows", fb.dist.size()}}}};
    if (fa.dist.total() > 0.0) j["file_a"]["moments"] = to_json(moments(fa.dist));
    if (fb.dist.total() > 0.0) j["file_b"]["moments"] = to_json(moments(fb.dist));
    return j;
}

}  // namespace qwalk
