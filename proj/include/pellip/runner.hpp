#pragma once

#include "pellip/io.hpp"

namespace pellip {

constexpr const char* kToolVersion = "0.1.0";

enum class RunStatus : int {
    kOk = 0,
    kSchemaError = 2,
    kVerdictFailure = 3,  // a numerical verdict flagged (e.g. contractivity violation)
    kInconclusive = 4,
};

struct ExperimentConfig {
    std::string command;
    Json inputs;
    uint64_t seed = 1;
    std::string output_path;  // subdirectory for this run's files

    static ExperimentConfig from_json(const Json& j);
};

struct RunRecord {
    std::string config_digest;
    std::string version = kToolVersion;
    double wall_ms = 0.0;
    Json verdicts;
    Json manifest = Json::array();  // [{file, fnv64}]
    RunStatus status = RunStatus::kOk;
};

/// Dispatches a validated config to the owning module, writes the outputs
/// under out_dir, and records a manifest of emitted files with content
/// digests. Every run is a pure function of (config, seed); wall time lives
/// only in the run record.
RunRecord run_command(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      int threads = 1, bool verbose = false);

}  // namespace pellip
