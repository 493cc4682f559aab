// qwalk: command-line front end.
//
//   qwalk simulate   --config run.json | --preset fig2b  [--output-root DIR] [--parallel]
//   qwalk dispersion --theta pi/4 --samples 1025 [--output fig1.csv]
//   qwalk predict    flat-top --sigma0 15 --theta pi/4 --t 20000
//   qwalk compare    a.csv b.csv --metric L1
//
// Results go to stdout as JSON (CSV for dispersion); failures exit nonzero with
// {"error": {"kind": ..., "message": ...}} on stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qwalk/qwalk.hpp"

namespace {

std::filesystem::path preset_dir() {
    if (const char* env = std::getenv("QWALK_PRESET_DIR")) return env;
#ifdef QWALK_PRESET_DIR
    return QWALK_PRESET_DIR;
#else
    return "configs";
#endif
}

double angle(const std::string& s, const std::string& name) { return qwalk::parse_angle(qwalk::json(s), name); }

int fail(const std::string& kind, const std::string& message, int code = 1) {
    std::cerr << qwalk::error_json(kind, message).dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coined quantum walk simulator and analysis workbench"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a configured simulation and write CSV/JSON outputs");
    std::string config_path, preset, output_root, theta_s, engine_s, output_path, truncation_s;
    std::optional<std::int64_t> t_max;
    std::vector<std::int64_t> sample_times;
    bool parallel = false;
    auto* cfg_opt = sim->add_option("--config", config_path, "Run config JSON file");
    auto* preset_opt = sim->add_option("--preset", preset, "Shipped preset: fig1, fig2a, fig2b, fig2c");
    cfg_opt->excludes(preset_opt);
    sim->add_option("--output-root", output_root, "Directory prefixed to relative output paths");
    sim->add_option("--theta", theta_s, "Override theta (number or pi expression)");
    sim->add_option("--engine", engine_s, "Override engine: map, spectral, continuum");
    sim->add_option("--t_max", t_max, "Override t_max");
    sim->add_option("--sample_times", sample_times, "Override sample_times");
    sim->add_option("--output_path", output_path, "Override output_path (single-run configs)");
    sim->add_option("--truncation", truncation_s, "Override truncation: 1, 2, 3, exact");
    sim->add_flag("--parallel", parallel, "Evaluate independent runs concurrently");

    // dispersion
    auto* disp = app.add_subcommand("dispersion", "Export omega(k) and the group velocity as CSV");
    std::string disp_theta = "pi/4", disp_out;
    std::size_t disp_samples = 1025;
    disp->add_option("--theta", disp_theta, "Coin angle (number or pi expression)");
    disp->add_option("--samples", disp_samples, "Number of k samples on [-pi, pi]");
    disp->add_option("--output", disp_out, "Output CSV (default: stdout)");

    // predict
    auto* pred = app.add_subcommand("predict", "Closed-form predictions: gaussian-width, flat-top, talbot");
    std::string kind_s, pred_theta = "pi/4";
    qwalk::PredictParams pp;
    pred->add_option("kind", kind_s, "gaussian-width | flat-top | talbot")->required();
    pred->add_option("--theta", pred_theta, "Coin angle (number or pi expression)");
    pred->add_option("--t", pp.t, "Time");
    pred->add_option("--sigma0", pp.sigma0, "Initial width (sites)");
    pred->add_option("--lambda", pp.lambda, "Spatial period (sites)");

    // compare
    auto* cmp = app.add_subcommand("compare", "Distance between two distribution CSV files");
    std::string file_a, file_b, metric_s = "L1";
    cmp->add_option("file_a", file_a)->required();
    cmp->add_option("file_b", file_b)->required();
    cmp->add_option("--metric", metric_s, "L1 or Linf");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        if (*sim) {
            std::filesystem::path path;
            if (!config_path.empty()) {
                path = config_path;
            } else if (!preset.empty()) {
                path = preset_dir() / (preset + ".json");
            } else {
                return fail("usage", "simulate needs --config or --preset", 2);
            }
            auto runs = qwalk::run_configs_from_json(qwalk::read_json_file(path));
            if (!output_path.empty()) {
                if (runs.size() != 1) return fail("usage", "--output_path applies to single-run configs only", 2);
                runs.front().output_path = output_path;
            }
            for (auto& r : runs) {
                if (!theta_s.empty()) r.theta = angle(theta_s, "theta");
                if (!engine_s.empty()) r.engine = qwalk::engine_from_string(engine_s);
                if (t_max) r.t_max = *t_max;
                if (!sample_times.empty()) r.sample_times = sample_times;
                if (!truncation_s.empty()) r.truncation = qwalk::truncation_from_string(truncation_s);
                if (!output_root.empty() && std::filesystem::path(r.output_path).is_relative()) {
                    r.output_path = (std::filesystem::path(output_root) / r.output_path).string();
                }
                qwalk::validate(r);
            }
            const auto records = qwalk::simulate_all(runs, parallel);
            qwalk::json out = qwalk::json::array();
            for (const auto& r : records) out.push_back(r);
            std::cout << (out.size() == 1 ? out.front() : out).dump(2) << '\n';
        } else if (*disp) {
            const std::string csv = qwalk::dispersion_csv(angle(disp_theta, "theta"), disp_samples);
            if (disp_out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream f(disp_out);
                if (!f) return fail("io", "cannot write '" + disp_out + "'");
                f << csv;
            }
        } else if (*pred) {
            pp.theta = angle(pred_theta, "theta");
            std::cout << qwalk::predict(qwalk::prediction_kind_from_string(kind_s), pp).dump(2) << '\n';
        } else if (*cmp) {
            std::cout << qwalk::compare(file_a, file_b, qwalk::metric_from_string(metric_s)).dump(2) << '\n';
        }
    } catch (const qwalk::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
