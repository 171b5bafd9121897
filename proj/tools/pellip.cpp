#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pellip/parallel.hpp"
#include "pellip/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pellip: p-ellipticity constants, generalized-convexity certification, and "
                 "divergence-form semigroup experiments"};
    std::string config_path;
    std::string out_dir = ".";
    int64_t seed_override = -1;
    int threads = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON experiment config")->required();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (default: PELLIP_THREADS or hardware)");
    app.add_flag("--verbose", verbose, "log progress to stderr");
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config " << config_path << "\n";
            return 2;
        }
        pellip::Json j = pellip::Json::parse(in, nullptr, true, true);
        pellip::ExperimentConfig cfg = pellip::ExperimentConfig::from_json(j);
        if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
        const pellip::RunRecord rec =
            pellip::run_command(cfg, out_dir, pellip::resolve_threads(threads), verbose);
        std::cout << "status " << static_cast<int>(rec.status) << ", " << rec.manifest.size()
                  << " file(s), " << rec.config_digest << "\n";
        return static_cast<int>(rec.status);
    } catch (const pellip::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const pellip::Json::exception& e) {
        std::cerr << "schema error: invalid JSON: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
