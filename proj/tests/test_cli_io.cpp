#include "sewlab/cli_io.hpp"

#include <json.hpp>

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace sewlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string golden_header(const std::string& kind) {
    return slurp(std::string(SEWLAB_TEST_DIR) + "/golden/" + kind + ".header");
}

struct TempFiles {
    std::vector<std::string> paths;
    ~TempFiles() {
        for (const auto& p : paths) std::remove(p.c_str());
    }
};

} // namespace

TEST_CASE("minimal euler-rate config gets the documented defaults") {
    const ExperimentConfig c =
        load_config_text("experiment = euler-rate\ndrift = holder:0.5\nnoise = bm\n");
    CHECK(c.n_list == std::vector<int>{64, 128, 256, 512, 1024});
    CHECK(c.paths == 4096);
    CHECK(c.n_ref == 16 * 1024);
    CHECK(c.m == 2);
}

TEST_CASE("config errors carry field names") {
    CHECK_THROWS_WITH_AS(load_config_text("experiment = euler-rate\ndrift = holder:1.5\n"),
                         doctest::Contains("gamma out of (0,1]"), config_error);
    CHECK_THROWS_WITH_AS(load_config_text("drift = holder:0.5\n"),
                         doctest::Contains("experiment"), config_error);
    CHECK_THROWS_WITH_AS(load_config_text("experiment = euler-rate\nfrobnicate = 3\n"),
                         doctest::Contains("frobnicate"), config_error);
    CHECK_THROWS_WITH_AS(load_config_text("experiment = euler-rate\npaths = 8\n"),
                         doctest::Contains("paths"), config_error);
    CHECK_THROWS_AS(load_config_text("experiment = euler-rate\nn_list = 64,32,128,256\n"),
                    config_error);
}

TEST_CASE("out-of-regime stable parameters are accepted with a warning") {
    std::vector<std::string> warnings;
    const ExperimentConfig c = load_config_text(
        "experiment = euler-rate\ndrift = holder:0.2\nnoise = stable:1.5\n", &warnings);
    CHECK(c.noise == "stable:1.5");
    REQUIRE(!warnings.empty());
    CHECK(warnings.front().find("out-of-regime") != std::string::npos);
}

TEST_CASE("json configs are accepted") {
    const char* text = R"({
        "experiment": "euler-rate",
        "drift": "holder:0.5",
        "noise": "bm",
        "n_list": [8, 16, 32, 64],
        "n_ref": 1024,
        "paths": 64
    })";
    const ExperimentConfig c = load_config_text(text);
    CHECK(c.n_list == std::vector<int>{8, 16, 32, 64});
    CHECK(c.paths == 64);
}

TEST_CASE("config round-trip through the flat serializer") {
    ExperimentConfig c = load_config_text("experiment = jn-check\ndrift = indicator:0:1\n"
                                          "noise = stable:1.5\nn = 128\npaths = 256\n"
                                          "assert_slope = -0.75+-0.1\n");
    const ExperimentConfig back = load_config_text(serialize_config(c));
    CHECK(back == c);
}

TEST_CASE("SEWLAB_SEED overrides the master seed") {
    setenv("SEWLAB_SEED", "987654321", 1);
    const ExperimentConfig c =
        load_config_text("experiment = euler-rate\nmaster_seed = 1\n");
    unsetenv("SEWLAB_SEED");
    CHECK(c.master_seed == 987654321ULL);
}

TEST_CASE("zero-drift run is marked degenerate and still exits cleanly") {
    TempFiles cleanup;
    ExperimentConfig c = load_config_text(
        "experiment = euler-rate\ndrift = zero\nnoise = bm\nn_list = 8,16,32,64\n"
        "n_ref = 1024\npaths = 64\noutput_prefix = tmp_zero_drift\n");
    const ResultRecord record = run(c);
    cleanup.paths = {record.csv_path, record.summary_path};
    CHECK(record.exit_code == 0);
    const auto summary = nlohmann::json::parse(record.summary_text);
    CHECK(summary.at("degenerate").get<bool>());
    CHECK(summary.at("fit").at("degenerate").get<bool>());
}

TEST_CASE("assertion mode gates the exit code") {
    TempFiles cleanup;
    const std::string base =
        "experiment = euler-rate\ndrift = holder:0.5\nnoise = bm\nn_list = 8,16,32,64\n"
        "n_ref = 1024\npaths = 128\noutput_prefix = tmp_assert\n";
    ExperimentConfig pass_cfg = load_config_text(base + "assert_slope = -0.75+-0.6\n");
    const ResultRecord pass_rec = run(pass_cfg);
    cleanup.paths = {pass_rec.csv_path, pass_rec.summary_path};
    CHECK(pass_rec.exit_code == 0);

    ExperimentConfig fail_cfg = load_config_text(base + "assert_slope = -0.75+-0.0001\n");
    const ResultRecord fail_rec = run(fail_cfg);
    CHECK(fail_rec.exit_code == 2);
    const auto summary = nlohmann::json::parse(fail_rec.summary_text);
    CHECK(!summary.at("assertion").at("pass").get<bool>());
}

TEST_CASE("csv schema is stable per experiment kind (golden headers)") {
    TempFiles cleanup;
    auto header_of = [](const std::string& csv) {
        return csv.substr(0, csv.find('\n') + 1);
    };

    {
        ExperimentConfig c = load_config_text(
            "experiment = euler-rate\ndrift = holder:0.5\nnoise = bm\nn_list = 8,16,32,64\n"
            "n_ref = 1024\npaths = 64\noutput_prefix = tmp_golden_rate\n");
        const ResultRecord r = run(c);
        cleanup.paths.push_back(r.csv_path);
        cleanup.paths.push_back(r.summary_path);
        CHECK(header_of(r.csv_text) == golden_header("euler-rate"));

        c.experiment = ExperimentKind::occupation_rate;
        c.output_prefix = "tmp_golden_occ";
        const ResultRecord r2 = run(c);
        cleanup.paths.push_back(r2.csv_path);
        cleanup.paths.push_back(r2.summary_path);
        CHECK(header_of(r2.csv_text) == golden_header("occupation-rate"));
    }
    {
        ExperimentConfig c = load_config_text(
            "experiment = averaging-probe\ndrift = holder:0.5\nnoise = fbm:0.5\n"
            "x_points = 128\npaths = 64\nn_time = 256\noutput_prefix = tmp_golden_avg\n");
        const ResultRecord r = run(c);
        cleanup.paths.push_back(r.csv_path);
        cleanup.paths.push_back(r.summary_path);
        CHECK(header_of(r.csv_text) == golden_header("averaging-probe"));
    }
    {
        ExperimentConfig c = load_config_text(
            "experiment = sew-check\ngerm = young\nnoise = fbm:0.7\nmax_level = 5\n"
            "paths = 64\noutput_prefix = tmp_golden_sew\n");
        const ResultRecord r = run(c);
        cleanup.paths.push_back(r.csv_path);
        cleanup.paths.push_back(r.summary_path);
        CHECK(header_of(r.csv_text) == golden_header("sew-check"));
    }
    {
        ExperimentConfig c = load_config_text(
            "experiment = jn-check\ndrift = indicator:0:1\nnoise = stable:1.5\nn = 32\n"
            "sim_factor = 2\npaths = 64\nrestart_paths = 256\noutput_prefix = tmp_golden_jn\n");
        const ResultRecord r = run(c);
        cleanup.paths.push_back(r.csv_path);
        cleanup.paths.push_back(r.summary_path);
        CHECK(header_of(r.csv_text) == golden_header("jn-check"));
    }
    {
        ExperimentConfig c = load_config_text(
            "experiment = coupling-sweep\ndrift = mollified:indicator:0:1:0.01\nnoise = bm\n"
            "lambda_list = 1,2,4\nn_sim = 256\npaths = 64\ndelta_mollify = 0.09\n"
            "output_prefix = tmp_golden_coupling\n");
        const ResultRecord r = run(c);
        cleanup.paths.push_back(r.csv_path);
        cleanup.paths.push_back(r.summary_path);
        CHECK(header_of(r.csv_text) == golden_header("coupling-sweep"));
    }
}

TEST_CASE("byte-identical replay of a full run") {
    TempFiles cleanup;
    ExperimentConfig c = load_config_text(
        "experiment = occupation-rate\ndrift = indicator:0:1\nnoise = bm\nn_list = 8,16,32,64\n"
        "n_ref = 1024\npaths = 128\noutput_prefix = tmp_replay\n");
    const ResultRecord r1 = run(c);
    cleanup.paths = {r1.csv_path, r1.summary_path};
    const std::string bytes1 = slurp(r1.csv_path);
    const ResultRecord r2 = run(c);
    const std::string bytes2 = slurp(r2.csv_path);
    CHECK(bytes1 == bytes2);
    CHECK(!bytes1.empty());
}

TEST_CASE("plot scripts reference the csv and the theory guide") {
    TempFiles cleanup;
    ExperimentConfig c = load_config_text(
        "experiment = euler-rate\ndrift = holder:0.5\nnoise = bm\nn_list = 8,16,32,64\n"
        "n_ref = 1024\npaths = 64\noutput_prefix = tmp_plot\n");
    const ResultRecord r = run(c);
    cleanup.paths = {r.csv_path, r.summary_path};
    const std::string gp = emit_plot_script(r.summary_path);
    cleanup.paths.push_back(gp);
    const std::string script = slurp(gp);
    CHECK(script.find("tmp_plot.csv") != std::string::npos);
    CHECK(script.find("set logscale xy") != std::string::npos);
    CHECK(script.find("theory slope") != std::string::npos);

    // refuse summaries with fewer than 2 rows
    std::ofstream bad("tmp_plot_bad.json");
    bad << "{\"rows\": 1, \"csv\": \"x.csv\", \"experiment\": \"euler-rate\"}";
    bad.close();
    cleanup.paths.push_back("tmp_plot_bad.json");
    CHECK_THROWS_AS(emit_plot_script("tmp_plot_bad.json"), config_error);
}

TEST_CASE("experiment name round trip") {
    for (const char* name : {"euler-rate", "occupation-rate", "averaging-probe", "sew-check",
                             "jn-check", "coupling-sweep"}) {
        CHECK(experiment_name(parse_experiment(name)) == name);
    }
    CHECK_THROWS_AS(parse_experiment("laplace-rate"), config_error);
}

TEST_CASE("noise parsing") {
    CHECK(parse_noise("bm").kind == NoiseKind::BM);
    CHECK(parse_noise("fbm:0.7").hurst == doctest::Approx(0.7));
    CHECK(parse_noise("stable:1.5").alpha == doctest::Approx(1.5));
    CHECK_THROWS_AS(parse_noise("fbm:1.7"), config_error);
    CHECK_THROWS_AS(parse_noise("white"), config_error);
}
