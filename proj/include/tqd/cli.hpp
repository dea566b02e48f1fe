#pragma once

#include "tqd/analysis.hpp"
#include "tqd/sampler.hpp"
#include "tqd/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace tqd::cli {

using Json = nlohmann::ordered_json;

/// Every parameter a command reads, with defaults. Config files and flags are
/// merged over this; the merged object is what gets echoed and hashed.
Json default_config(const std::string& command);

/// Overlays `patch` onto `base`. Unknown keys are a usage error, so typos in a
/// config file fail loudly instead of silently running defaults.
void merge_config(Json& base, const Json& patch, const std::string& where = "config");

SamplerConfig sampler_config_from(const Json& config);
TrainerConfig trainer_config_from(const Json& config);
GeneratorOptions generator_from(const Json& config);

/// Hex FNV-1a of the serialized resolved config.
std::string run_id(const Json& config);

/// Creates out_dir/<run-id>/, writes config.json there and prints it to `log`.
std::filesystem::path prepare_run_dir(const Json& config, const std::filesystem::path& out_dir, std::ostream& log);

// Commands take a fully resolved config and return the process exit code.
int cmd_synth(const Json& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_curate(const Json& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_sample_stats(const Json& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_train(const Json& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_probe(const Json& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Argument parsing and error-to-exit-code mapping:
/// 0 ok, 1 usage, 2 I/O, 3 data, 4 numeric, 5 artifact mismatch.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tqd::cli
