#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>

#include "genreg/bench.hpp"
#include "genreg/pipeline.hpp"

namespace genreg {

/// Malformed or out-of-range configuration. The message names the line/column
/// (syntax errors) or the field (schema errors).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses JSON text, reporting syntax errors as "<source>:<line>:<col>: ...".
nlohmann::json parse_json_text(const std::string& text, const std::string& source);
nlohmann::json load_json_file(const std::filesystem::path& path);

// Flat JSON objects; every key is optional, unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

bench::BenchConfig bench_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const bench::BenchConfig& cfg);

}  // namespace genreg
