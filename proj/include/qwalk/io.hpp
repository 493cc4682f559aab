#pragma once

// File formats: JSON run configs and result records, distribution CSVs
// (header x,P,re_R,im_R,re_L,im_L; numbers with 17 significant digits).

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwalk/analysis.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/initcond.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Angles: plain numbers, or strings such as "pi/2", "-pi/4", "0.25*pi", "3pi/4".

inline double parse_angle(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ConfigError("field '" + field + "' must be a number or a pi expression");
    const std::string s = j.get<std::string>();
    static const std::regex re(R"(^\s*([+-])?\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)?\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
    std::smatch m;
    if (std::regex_match(s, m, re)) {
        double v = pi;
        if (m[2].matched) v *= std::stod(m[2].str());
        if (m[3].matched) {
            const double d = std::stod(m[3].str());
            if (d == 0.0) throw ConfigError("field '" + field + "': division by zero");
            v /= d;
        }
        if (m[1].matched && m[1].str() == "-") v = -v;
        return v;
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno != 0) {
        throw ConfigError("field '" + field + "': cannot parse angle '" + s + "'");
    }
    return v;
}

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(ctx + ": missing field '" + key + "'");
    return j.at(key);
}

template <class T>
T get_as(const json& j, const std::string& ctx) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(ctx + ": " + e.what());
    }
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& ctx) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError(ctx + ": complex numbers are written as [re, im]");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Initial condition specs

inline json to_json(const EnvelopeSpec& e) {
    json j{{"family", to_string(e.family)}, {"x0", e.x0}};
    if (e.family != EnvelopeFamily::delta) j["sigma0"] = e.sigma0;
    if (e.family == EnvelopeFamily::sinc_gaussian) j["sigmaG"] = e.sigmaG;
    if (e.family == EnvelopeFamily::periodic) j["lambda"] = e.lambda;
    if (e.quad_phase) j["quad_phase"] = *e.quad_phase;
    if (e.cutoff) j["cutoff"] = *e.cutoff;
    return j;
}

inline EnvelopeSpec envelope_from_json(const json& j) {
    const std::string ctx = "initial.envelope";
    EnvelopeSpec e;
    e.family = envelope_family_from_string(detail::get_as<std::string>(detail::require(j, "family", ctx), ctx));
    if (j.contains("sigma0")) e.sigma0 = detail::get_as<double>(j.at("sigma0"), ctx + ".sigma0");
    if (j.contains("sigmaG")) e.sigmaG = detail::get_as<double>(j.at("sigmaG"), ctx + ".sigmaG");
    if (j.contains("lambda")) e.lambda = detail::get_as<double>(j.at("lambda"), ctx + ".lambda");
    if (j.contains("x0")) e.x0 = detail::get_as<double>(j.at("x0"), ctx + ".x0");
    if (j.contains("quad_phase")) e.quad_phase = detail::get_as<double>(j.at("quad_phase"), ctx + ".quad_phase");
    if (j.contains("cutoff")) e.cutoff = detail::get_as<double>(j.at("cutoff"), ctx + ".cutoff");
    validate(e);
    return e;
}

inline json to_json(const CoinChoice& c) {
    if (const auto* sel = std::get_if<EigenspinorSelector>(&c)) {
        return {{"type", "eigenspinor"}, {"k0", sel->k0}, {"s", sign(sel->s)}};
    }
    const auto& sp = std::get<CoinSpinor>(c);
    return {{"type", "spinor"}, {"components", json::array({detail::complex_to_json(sp.r), detail::complex_to_json(sp.l)})}};
}

inline CoinChoice coin_from_json(const json& j) {
    const std::string ctx = "initial.coin";
    const auto type = detail::get_as<std::string>(detail::require(j, "type", ctx), ctx + ".type");
    if (type == "eigenspinor") {
        EigenspinorSelector sel;
        sel.k0 = parse_angle(detail::require(j, "k0", ctx), ctx + ".k0");
        sel.s = branch_from_sign(detail::get_as<int>(detail::require(j, "s", ctx), ctx + ".s"));
        return sel;
    }
    if (type == "spinor") {
        const json& comp = detail::require(j, "components", ctx);
        if (!comp.is_array() || comp.size() != 2) throw ConfigError(ctx + ".components must hold two entries");
        CoinSpinor sp{detail::complex_from_json(comp[0], ctx), detail::complex_from_json(comp[1], ctx)};
        if (!(std::norm(sp.r) + std::norm(sp.l) > 0.0)) throw ConfigError(ctx + ": zero spinor");
        return sp;
    }
    throw ConfigError(ctx + ".type must be 'spinor' or 'eigenspinor'");
}

inline json to_json(const InitialConditionSpec& s) {
    return {{"envelope", to_json(s.envelope)}, {"carrier_k0", s.carrier_k0}, {"coin", to_json(s.coin)}};
}

inline InitialConditionSpec initial_from_json(const json& j) {
    InitialConditionSpec s;
    s.envelope = envelope_from_json(detail::require(j, "envelope", "initial"));
    s.carrier_k0 = j.contains("carrier_k0") ? parse_angle(j.at("carrier_k0"), "initial.carrier_k0") : 0.0;
    s.coin = coin_from_json(detail::require(j, "coin", "initial"));
    return s;
}

// ---------------------------------------------------------------------------
// Run configuration

enum class Engine { map, spectral, continuum };

inline std::string to_string(Engine e) {
    switch (e) {
        case Engine::map: return "map";
        case Engine::spectral: return "spectral";
        case Engine::continuum: return "continuum";
    }
    return "?";
}

inline Engine engine_from_string(const std::string& s) {
    if (s == "map") return Engine::map;
    if (s == "spectral") return Engine::spectral;
    if (s == "continuum") return Engine::continuum;
    throw ConfigError("engine must be map, spectral or continuum; got '" + s + "'");
}

enum class Output { distribution, moments, flatness, dispersion, packets };

inline std::string to_string(Output o) {
    switch (o) {
        case Output::distribution: return "distribution";
        case Output::moments: return "moments";
        case Output::flatness: return "flatness";
        case Output::dispersion: return "dispersion";
        case Output::packets: return "packets";
    }
    return "?";
}

inline Output output_from_string(const std::string& s) {
    for (auto o : {Output::distribution, Output::moments, Output::flatness, Output::dispersion, Output::packets}) {
        if (to_string(o) == s) return o;
    }
    throw ConfigError("unknown output '" + s + "'");
}

struct RunConfig {
    double theta = pi / 4;
    Engine engine = Engine::map;
    InitialConditionSpec initial;
    std::int64_t t_max = 0;
    std::vector<std::int64_t> sample_times;
    std::vector<Output> outputs{Output::distribution, Output::moments};
    std::string output_path = "out";
    std::optional<Truncation> truncation;  // continuum engine only
    std::optional<std::size_t> ring_size;  // spectral engine; default from the light cone
    double flatness_rho = 0.8;
    std::size_t dispersion_samples = 1025;

    bool wants(Output o) const { return std::find(outputs.begin(), outputs.end(), o) != outputs.end(); }
};

inline void validate(const RunConfig& c) {
    if (c.t_max < 0) throw ConfigError("t_max must be non-negative");
    for (auto t : c.sample_times) {
        if (t < 0 || t > c.t_max) {
            throw ConfigError("sample time " + std::to_string(t) + " outside [0, t_max=" + std::to_string(c.t_max) + "]");
        }
    }
    if (c.engine == Engine::continuum && !c.truncation) {
        throw ConfigError("engine=continuum requires a 'truncation' field (1, 2, 3 or exact)");
    }
    if (!(c.flatness_rho > 0.0 && c.flatness_rho <= 1.0)) throw ConfigError("flatness_rho must lie in (0, 1]");
    if (c.dispersion_samples < 16) throw ConfigError("dispersion_samples must be >= 16");
    if (c.output_path.empty()) throw ConfigError("output_path must not be empty");
    (void)CoinParameter(c.theta);
}

inline json to_json(const RunConfig& c) {
    json outs = json::array();
    for (auto o : c.outputs) outs.push_back(to_string(o));
    json j{{"theta", c.theta},
           {"engine", to_string(c.engine)},
           {"initial", to_json(c.initial)},
           {"t_max", c.t_max},
           {"sample_times", c.sample_times},
           {"outputs", outs},
           {"output_path", c.output_path},
           {"flatness_rho", c.flatness_rho},
           {"dispersion_samples", c.dispersion_samples}};
    if (c.truncation) j["truncation"] = to_string(*c.truncation);
    if (c.ring_size) j["ring_size"] = *c.ring_size;
    return j;
}

inline RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    static const std::vector<std::string> known{"theta",        "engine",      "initial",     "t_max",
                                                "sample_times", "outputs",     "output_path", "truncation",
                                                "ring_size",    "flatness_rho", "dispersion_samples"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown run config field '" + key + "'");
        }
    }
    RunConfig c;
    c.theta = parse_angle(detail::require(j, "theta", "config"), "theta");
    if (j.contains("engine")) c.engine = engine_from_string(detail::get_as<std::string>(j.at("engine"), "engine"));
    c.initial = initial_from_json(detail::require(j, "initial", "config"));
    c.t_max = detail::get_as<std::int64_t>(detail::require(j, "t_max", "config"), "t_max");
    if (j.contains("sample_times")) {
        c.sample_times = detail::get_as<std::vector<std::int64_t>>(j.at("sample_times"), "sample_times");
    } else {
        c.sample_times = {c.t_max};
    }
    if (j.contains("outputs")) {
        c.outputs.clear();
        for (const auto& o : j.at("outputs")) c.outputs.push_back(output_from_string(detail::get_as<std::string>(o, "outputs")));
    }
    if (j.contains("output_path")) c.output_path = detail::get_as<std::string>(j.at("output_path"), "output_path");
    if (j.contains("truncation")) {
        const json& t = j.at("truncation");
        c.truncation = truncation_from_string(t.is_number_integer() ? std::to_string(t.get<int>())
                                                                    : detail::get_as<std::string>(t, "truncation"));
    }
    if (j.contains("ring_size")) c.ring_size = detail::get_as<std::size_t>(j.at("ring_size"), "ring_size");
    if (j.contains("flatness_rho")) c.flatness_rho = detail::get_as<double>(j.at("flatness_rho"), "flatness_rho");
    if (j.contains("dispersion_samples")) {
        c.dispersion_samples = detail::get_as<std::size_t>(j.at("dispersion_samples"), "dispersion_samples");
    }
    validate(c);
    return c;
}

// A config file holds one RunConfig object or {"runs": [RunConfig, ...]}.
inline std::vector<RunConfig> run_configs_from_json(const json& j) {
    std::vector<RunConfig> runs;
    if (j.is_object() && j.contains("runs")) {
        if (j.size() != 1 || !j.at("runs").is_array() || j.at("runs").empty()) {
            throw ConfigError("'runs' must be the only top-level field and a non-empty array");
        }
        for (const auto& r : j.at("runs")) runs.push_back(run_config_from_json(r));
    } else {
        runs.push_back(run_config_from_json(j));
    }
    return runs;
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path.string() + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Distribution CSV

inline const char* const distribution_csv_header = "x,P,re_R,im_R,re_L,im_L";

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Writes one row per site; amplitude columns are left empty when `state` is null.
inline void write_distribution_csv(std::ostream& out, const ProbabilityDistribution& dist,
                                   const WalkerState* state = nullptr) {
    out << distribution_csv_header << '\n';
    std::string line;
    for (std::size_t i = 0; i < dist.P.size(); ++i) {
        const std::int64_t x = dist.x_min + static_cast<std::int64_t>(i);
        line = std::to_string(x);
        line += ',';
        line += format_double(dist.P[i]);
        if (state) {
            const cplx r = state->R_at(x), l = state->L_at(x);
            for (double v : {r.real(), r.imag(), l.real(), l.imag()}) {
                line += ',';
                line += format_double(v);
            }
        } else {
            line += ",,,,";
        }
        out << line << '\n';
    }
}

inline void write_distribution_csv(const std::filesystem::path& path, const ProbabilityDistribution& dist,
                                   const WalkerState* state = nullptr) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    write_distribution_csv(out, dist, state);
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

struct DistributionFile {
    ProbabilityDistribution dist;
    std::optional<std::vector<cplx>> R;  // present when every row carries amplitudes
    std::optional<std::vector<cplx>> L;
};

inline DistributionFile read_distribution_csv(std::istream& in, const std::string& name = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != distribution_csv_header) {
        throw SchemaError(name + ": expected header '" + std::string(distribution_csv_header) + "'");
    }
    DistributionFile f;
    std::vector<cplx> R, L;
    bool amplitudes = true;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 6) throw SchemaError(name + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " fields");
        auto num = [&](const std::string& s) {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || *end != '\0') throw SchemaError(name + ": row " + std::to_string(row) + ": bad number '" + s + "'");
            return v;
        };
        const double xv = num(cells[0]);
        const auto x = static_cast<std::int64_t>(xv);
        if (static_cast<double>(x) != xv) throw SchemaError(name + ": non-integer site " + cells[0]);
        if (f.dist.P.empty()) {
            f.dist.x_min = x;
        } else if (x != f.dist.x_max() + 1) {
            throw SchemaError(name + ": sites must be consecutive (row " + std::to_string(row) + ")");
        }
        const double p = num(cells[1]);
        if (!(p >= 0.0)) throw SchemaError(name + ": negative probability at x=" + cells[0]);
        f.dist.P.push_back(p);
        const bool has_amp = !cells[2].empty();
        if (has_amp) {
            R.emplace_back(num(cells[2]), num(cells[3]));
            L.emplace_back(num(cells[4]), num(cells[5]));
        } else {
            amplitudes = false;
        }
    }
    if (f.dist.P.empty()) throw SchemaError(name + ": no data rows");
    if (amplitudes && R.size() == f.dist.P.size()) {
        f.R = std::move(R);
        f.L = std::move(L);
    }
    return f;
}

inline DistributionFile read_distribution_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path.string() + "'");
    return read_distribution_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Report serialization

inline json to_json(const Moments& m) { return {{"mean", m.mean}, {"std", m.std}, {"total", m.total}}; }

inline json to_json(const FlatTopPrediction& p) {
    return {{"sigma0", p.sigma0}, {"theta", p.theta}, {"t", p.t}, {"w", p.w}, {"level", p.level},
            {"std", p.std}, {"transient_time", p.transient_time}, {"asymptotic", p.asymptotic}};
}

inline json to_json(const FlatnessReport& r) {
    json j{{"predicted_w", r.predicted_w},       {"plateau_window", r.plateau_window},
           {"center", r.center},                 {"plateau_mean", r.plateau_mean},
           {"level_error", r.level_error},       {"edge_sharpness", r.edge_sharpness},
           {"measured_width", r.measured_width}};
    j["ripple_rms"] = r.ripple_rms ? json(*r.ripple_rms) : json(nullptr);
    return j;
}

inline json to_json(const PacketTrack& t) {
    json packets = json::array();
    for (const auto& p : t.packets) {
        packets.push_back({{"velocity", p.velocity},
                           {"intercept", p.intercept},
                           {"residual_rms", p.residual_rms},
                           {"mean_mass", p.mean_mass},
                           {"centroids", p.centroids},
                           {"masses", p.masses}});
    }
    return {{"times", t.times}, {"packets", packets}};
}

inline json error_json(const std::string& kind, const std::string& message) {
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace qwalk
