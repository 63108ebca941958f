#pragma once
// JSON run configuration with strict key checking, and its resolved echo.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "oralstack/evaluation.hpp"
#include "oralstack/ihml.hpp"

namespace oralstack {

struct RunPaths {
    std::filesystem::path manifest;
    std::filesystem::path features;
    std::filesystem::path bundle;
    std::filesystem::path out;
};

struct RunConfig {
    std::uint64_t seed = 0;
    IhmlConfig ihml = IhmlConfig::defaults();
    SplitSettings split;
    std::optional<std::uint64_t> split_seed;  // defaults to seed
    std::optional<AblationPreset> preset;     // restricts groups when set
    RunPaths paths;

    std::uint64_t resolved_split_seed() const { return split_seed.value_or(seed); }
    // The IHML config actually trained: seed and preset groups applied.
    IhmlConfig resolved_ihml() const;
    void validate() const;
};

// Keys absent from the document keep their defaults; unknown keys, wrong
// types and out-of-range values throw ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, RunConfig base = {});
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// Fully resolved configuration (thread count is deliberately not part of it).
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

} // namespace oralstack
