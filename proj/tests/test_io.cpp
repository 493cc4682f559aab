#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "qwalk/run.hpp"
#include "test_support.hpp"

using namespace qwalk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qwalk_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_config(const std::string& engine, const fs::path& out) {
    json j = json::parse(R"({
      "theta": "pi/4",
      "initial": {"envelope": {"family": "gaussian", "sigma0": 6, "x0": 0},
                  "carrier_k0": "pi/2", "coin": {"type": "eigenspinor", "k0": "pi/2", "s": 1}},
      "t_max": 200, "sample_times": [50, 100, 200],
      "outputs": ["distribution", "moments", "packets", "dispersion"]
    })");
    j["engine"] = engine;
    j["output_path"] = out.string();
    if (engine == "continuum") j["truncation"] = "exact";
    return j;
}

struct Proc {
    int code;
    std::string out;
    std::string err;
};

Proc run_cli(const std::string& args, const fs::path& dir) {
    const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd = std::string(QWALK_CLI_PATH) + " " + args + " >" + o.string() + " 2>" + e.string();
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), slurp(o), slurp(e)};
}

}  // namespace

TEST(ParseAngle, Forms) {
    EXPECT_DOUBLE_EQ(parse_angle(json("pi/4"), "theta"), pi / 4);
    EXPECT_DOUBLE_EQ(parse_angle(json("-pi/2"), "theta"), -pi / 2);
    EXPECT_DOUBLE_EQ(parse_angle(json("0.25*pi"), "theta"), pi / 4);
    EXPECT_DOUBLE_EQ(parse_angle(json("3pi/4"), "theta"), 3 * pi / 4);
    EXPECT_DOUBLE_EQ(parse_angle(json("pi"), "theta"), pi);
    EXPECT_DOUBLE_EQ(parse_angle(json(0.5), "theta"), 0.5);
    EXPECT_DOUBLE_EQ(parse_angle(json("0.5"), "theta"), 0.5);
    EXPECT_THROW(parse_angle(json("tau/2"), "theta"), ConfigError);
    EXPECT_THROW(parse_angle(json("pi/0"), "theta"), ConfigError);
    EXPECT_THROW(parse_angle(json::array(), "theta"), ConfigError);
}

TEST(DistributionCsv, RoundTripIsExact) {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        const auto st = qwalk::testing::random_state(rng, 1 + rep * 7, -3 - rep);
        const auto d = probability(st);
        std::stringstream ss;
        write_distribution_csv(ss, d, &st);
        const auto back = read_distribution_csv(ss);
        EXPECT_EQ(back.dist.x_min, d.x_min);
        EXPECT_EQ(back.dist.P, d.P);
        ASSERT_TRUE(back.R && back.L);
        for (std::size_t i = 0; i < d.P.size(); ++i) {
            const std::int64_t x = d.x_min + static_cast<std::int64_t>(i);
            EXPECT_EQ((*back.R)[i], st.R_at(x));
            EXPECT_EQ((*back.L)[i], st.L_at(x));
        }
    }
}

TEST(DistributionCsv, WithoutAmplitudes) {
    ProbabilityDistribution d;
    d.x_min = -2;
    d.P = {0.1, 0.2, 0.3, 0.4};
    std::stringstream ss;
    write_distribution_csv(ss, d);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "x,P,re_R,im_R,re_L,im_L");
    EXPECT_NE(text.find("\n-2,0.10000000000000001,,,,\n"), std::string::npos);
    const auto back = read_distribution_csv(ss);
    EXPECT_EQ(back.dist.P, d.P);
    EXPECT_FALSE(back.R.has_value());
}

TEST(DistributionCsv, SchemaErrors) {
    auto parse = [](const std::string& s) {
        std::stringstream ss(s);
        return read_distribution_csv(ss);
    };
    EXPECT_THROW(parse(""), SchemaError);
    EXPECT_THROW(parse("x,P\n0,1\n"), SchemaError);
    EXPECT_THROW(parse("x,P,re_R,im_R,re_L,im_L\n"), SchemaError);
    EXPECT_THROW(parse("x,P,re_R,im_R,re_L,im_L\n0,0.5,,,,\n2,0.5,,,,\n"), SchemaError);
    EXPECT_THROW(parse("x,P,re_R,im_R,re_L,im_L\n0,-0.5,,,,\n"), SchemaError);
    EXPECT_THROW(parse("x,P,re_R,im_R,re_L,im_L\n0,abc,,,,\n"), SchemaError);
    EXPECT_THROW(parse("x,P,re_R,im_R,re_L,im_L\n0.5,0.5,,,,\n"), SchemaError);
    EXPECT_THROW(parse("x,P,re_R,im_R,re_L,im_L\n0,0.5,1\n"), SchemaError);
    EXPECT_NO_THROW(parse("x,P,re_R,im_R,re_L,im_L\r\n0,0.5,,,,\r\n1,0.5,,,,\r\n"));
}

TEST(RunConfig, ParsesAndRejects) {
    const auto c = run_config_from_json(small_config("map", "o"));
    EXPECT_DOUBLE_EQ(c.theta, pi / 4);
    EXPECT_EQ(c.engine, Engine::map);
    EXPECT_EQ(c.sample_times, (std::vector<std::int64_t>{50, 100, 200}));
    EXPECT_TRUE(c.wants(Output::packets));
    EXPECT_FALSE(c.wants(Output::flatness));
    EXPECT_EQ(std::get<EigenspinorSelector>(c.initial.coin).s, Branch::plus);

    // Round trip through to_json.
    const auto again = run_config_from_json(to_json(c));
    EXPECT_EQ(to_json(again), to_json(c));

    auto bad = small_config("map", "o");
    bad["colour"] = "blue";
    EXPECT_THROW(run_config_from_json(bad), ConfigError);
    auto cont = small_config("continuum", "o");
    cont.erase("truncation");
    EXPECT_THROW(run_config_from_json(cont), ConfigError);
    auto late = small_config("map", "o");
    late["sample_times"] = {300};
    EXPECT_THROW(run_config_from_json(late), ConfigError);
    auto theta = small_config("map", "o");
    theta["theta"] = 2.0;
    EXPECT_THROW(run_config_from_json(theta), DomainError);
    auto trunc = small_config("continuum", "o");
    trunc["truncation"] = 2;
    EXPECT_EQ(*run_config_from_json(trunc).truncation, Truncation::second);
    trunc["truncation"] = 4;
    EXPECT_THROW(run_config_from_json(trunc), Error);
    EXPECT_THROW(run_configs_from_json(json{{"runs", json::array()}}), ConfigError);
}

TEST(Presets, AllParse) {
    const fs::path dir(QWALK_PRESET_DIR);
    const std::map<std::string, std::size_t> expected{{"fig1", 1}, {"fig2a", 1}, {"fig2b", 1}, {"fig2c", 3}};
    for (const auto& [name, count] : expected) {
        const auto runs = run_configs_from_json(read_json_file(dir / (name + ".json")));
        EXPECT_EQ(runs.size(), count) << name;
    }
    const auto c = run_configs_from_json(read_json_file(dir / "fig2c.json"));
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_DOUBLE_EQ(c[i].initial.envelope.sigmaG, preset_sigmaG_factors[i] * c[i].initial.envelope.sigma0);
    }
    EXPECT_THROW(read_json_file(dir / "missing.json"), ConfigError);
}

TEST(Simulate, DeterministicAcrossRuns) {
    const fs::path root = scratch("determinism");
    for (const std::string engine : {"map", "spectral", "continuum"}) {
        const auto a = simulate(run_config_from_json(small_config(engine, root / (engine + "_a"))));
        const auto b = simulate(run_config_from_json(small_config(engine, root / (engine + "_b"))));
        for (const auto& s : a["samples"]) {
            const std::string f = s["file"];
            EXPECT_EQ(slurp(root / (engine + "_a") / f), slurp(root / (engine + "_b") / f)) << engine << ' ' << f;
        }
        auto strip = [](json r) {
            r.erase("timing");
            r["config"].erase("output_path");
            return r;
        };
        EXPECT_EQ(strip(a), strip(b)) << engine;
        EXPECT_EQ(slurp(root / (engine + "_a") / "dispersion.csv"), slurp(root / (engine + "_b") / "dispersion.csv"));
    }
    fs::remove_all(root);
}

TEST(Simulate, RecordMatchesFiles) {
    const fs::path root = scratch("record");
    const auto rec = simulate(run_config_from_json(small_config("spectral", root / "s")));
    ASSERT_EQ(rec["samples"].size(), 3u);
    for (const auto& s : rec["samples"]) {
        const auto f = read_distribution_csv(root / "s" / s["file"].get<std::string>());
        EXPECT_EQ(f.dist.size(), s["rows"].get<std::size_t>());
        EXPECT_EQ(f.dist.x_min, s["x_min"].get<std::int64_t>());
        EXPECT_NEAR(f.dist.total(), 1.0, 1e-12);
        EXPECT_DOUBLE_EQ(s["moments"]["mean"].get<double>(), moments(f.dist).mean);
    }
    EXPECT_EQ(rec["provenance"]["engine"], "spectral");
    EXPECT_TRUE(rec["provenance"].contains("ring_size"));
    ASSERT_EQ(rec["packets"]["packets"].size(), 1u);
    EXPECT_NEAR(rec["packets"]["packets"][0]["velocity"].get<double>(), 0.0, 1e-3);
    EXPECT_EQ(json::parse(slurp(root / "s" / "result.json")).at("samples"), rec["samples"]);

    const auto disp = slurp(root / "s" / "dispersion.csv");
    EXPECT_EQ(disp.substr(0, disp.find('\n')), "k,omega,vg");
    EXPECT_EQ(std::count(disp.begin(), disp.end(), '\n'), 1026);
    fs::remove_all(root);
}

TEST(Simulate, ParallelMatchesSerialAndRejectsSharedPaths) {
    const fs::path root = scratch("parallel");
    std::vector<RunConfig> runs{run_config_from_json(small_config("map", root / "p0")),
                                run_config_from_json(small_config("spectral", root / "p1"))};
    const auto par = simulate_all(runs, true);
    const auto ser = simulate_all(runs, false);
    for (std::size_t i = 0; i < runs.size(); ++i) EXPECT_EQ(par[i]["samples"], ser[i]["samples"]);
    runs[1].output_path = runs[0].output_path;
    EXPECT_THROW(simulate_all(runs, true), ConfigError);
    fs::remove_all(root);
}

TEST(Dispersion, CsvColumns) {
    const auto csv = dispersion_csv(pi / 4, 17);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "k,omega,vg");
    std::getline(ss, line);
    EXPECT_EQ(line.substr(0, line.find(',')), format_double(-pi));
    EXPECT_THROW(dispersion_csv(pi / 4, 8), DomainError);
    EXPECT_THROW(dispersion_csv(0.0, 64), DomainError);
}

TEST(Predict, Kinds) {
    PredictParams p;
    p.t = 20000;
    p.sigma0 = 15;
    const auto ft = predict(PredictionKind::flat_top, p);
    EXPECT_NEAR(ft["w"].get<double>(), 8377.58, 0.01);
    EXPECT_EQ(ft["kind"], "flat-top");
    p.t = 2000;
    EXPECT_NEAR(predict(PredictionKind::gaussian_width, p)["w"].get<double>(), 8.944, 1e-3);
    p.lambda = 10;
    EXPECT_NEAR(predict(PredictionKind::talbot, p)["T"].get<double>(), 15.9155, 1e-4);
    EXPECT_THROW(predict(PredictionKind::talbot, PredictParams{}), DomainError);
    EXPECT_THROW(prediction_kind_from_string("fresnel"), DomainError);
}

TEST(Compare, FilesAndMetrics) {
    const fs::path root = scratch("compare");
    ProbabilityDistribution a, b;
    a.x_min = 0;
    a.P = {0.5, 0.5};
    b.x_min = 1;
    b.P = {0.5, 0.5};
    write_distribution_csv(root / "a.csv", a);
    write_distribution_csv(root / "b.csv", b);
    const auto j = compare(root / "a.csv", root / "b.csv", Metric::L1);
    EXPECT_EQ(j["distance"].get<double>(), 1.0);
    EXPECT_EQ(j["file_a"]["rows"].get<std::size_t>(), 2u);
    EXPECT_EQ(compare(root / "a.csv", root / "b.csv", Metric::Linf)["distance"].get<double>(), 0.5);
    EXPECT_THROW(compare(root / "a.csv", root / "nope.csv", Metric::L1), SchemaError);
    fs::remove_all(root);
}

TEST(Cli, SubcommandsAndErrors) {
    const fs::path root = scratch("cli");
    auto r = run_cli("predict flat-top --sigma0 15 --theta pi/4 --t 20000", root);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["w"].get<double>(), 8377.58, 0.01);

    r = run_cli("dispersion --theta pi/4 --samples 33", root);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, dispersion_csv(pi / 4, 33));

    const fs::path cfg = root / "run.json";
    std::ofstream(cfg) << small_config("map", "sim").dump();
    r = run_cli("simulate --config " + cfg.string() + " --output-root " + root.string() + " --t_max 100 --sample_times 40 100", root);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rec = json::parse(r.out);
    EXPECT_EQ(rec["samples"].size(), 2u);
    EXPECT_TRUE(fs::exists(root / "sim" / "dist_t100.csv"));

    r = run_cli("compare " + (root / "sim" / "dist_t40.csv").string() + " " + (root / "sim" / "dist_t100.csv").string() +
                    " --metric Linf",
                root);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_GT(json::parse(r.out)["distance"].get<double>(), 0.0);

    r = run_cli("predict flat-top --theta 3 --sigma0 15 --t 1", root);
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"]["kind"], "domain");

    r = run_cli("simulate --preset nosuch", root);
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"]["kind"], "config");

    r = run_cli("compare " + (root / "missing.csv").string() + " " + (root / "missing.csv").string(), root);
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"]["kind"], "schema");

    r = run_cli("frobnicate", root);
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.err)["error"]["kind"], "usage");

    r = run_cli("simulate", root);
    EXPECT_EQ(r.code, 2);
    fs::remove_all(root);
}
