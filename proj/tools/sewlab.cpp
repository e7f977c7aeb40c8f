// sewlab: rate experiments and sewing diagnostics for SDE schemes with rough
// drifts. Subcommands: run, plot, list-drifts, selftest.

#include "sewlab/cli_io.hpp"
#include "sewlab/kernels.hpp"
#include "sewlab/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// exit codes: 0 ok, 1 usage/config, 2 assertion failure, 3 numerical error
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const sewlab::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const sewlab::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sewlab: stochastic-numerics experiments for SDEs with rough drifts"};
    app.set_version_flag("--version", std::string(sewlab::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string summary_path;
    std::string assert_slope;
    std::string simd;
    int workers = 0;

    CLI::App* cmd_run = app.add_subcommand("run", "run an experiment from a config file");
    cmd_run->add_option("config", config_path, "config file (flat key=value or JSON)")->required();
    cmd_run->add_option("--assert-slope", assert_slope,
                        "turn the run into a gate: '<target>±<tol>' on the fitted slope");
    cmd_run->add_option("--workers", workers, "worker threads (default: all cores)");
    cmd_run->add_option("--kernel", simd, "force kernel backend: scalar|avx2");

    CLI::App* cmd_plot = app.add_subcommand("plot", "emit a gnuplot script for a run summary");
    cmd_plot->add_option("summary", summary_path, "summary JSON produced by 'run'")->required();

    CLI::App* cmd_list = app.add_subcommand("list-drifts", "print the drift catalog");
    CLI::App* cmd_selftest = app.add_subcommand("selftest", "quick built-in property checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    return guarded([&]() -> int {
        if (!simd.empty()) {
            if (simd == "scalar")
                sewlab::kernels::set_backend(sewlab::kernels::Backend::scalar);
            else if (simd == "avx2")
                sewlab::kernels::set_backend(sewlab::kernels::Backend::avx2);
            else
                throw sewlab::config_error("--kernel must be scalar or avx2");
        }

        if (cmd_run->parsed()) {
            std::vector<std::string> warnings;
            sewlab::ExperimentConfig config = sewlab::load_config_file(config_path, &warnings);
            if (workers > 0) config.workers = workers;
            if (!assert_slope.empty())
                config.assert_slope = sewlab::parse_slope_assertion(assert_slope);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            const sewlab::ResultRecord record = sewlab::run(config);
            std::cout << "wrote " << record.csv_path << " and " << record.summary_path << " ("
                      << record.wall_seconds << " s)\n";
            if (record.exit_code == 2) std::cerr << "assertion FAILED (see summary)\n";
            return record.exit_code;
        }
        if (cmd_plot->parsed()) {
            const std::string path = sewlab::emit_plot_script(summary_path);
            std::cout << "wrote " << path << "\n";
            return 0;
        }
        if (cmd_list->parsed()) {
            for (const auto& label : sewlab::catalog_labels()) std::cout << label << "\n";
            return 0;
        }
        if (cmd_selftest->parsed()) return sewlab::selftest(std::cout) ? 0 : 2;
        return 1;
    });
}
