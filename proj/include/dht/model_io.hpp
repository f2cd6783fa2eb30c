#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "dht/source_models.hpp"

namespace dht {

enum class ModelKind { Discrete, Gaussian };
const char* to_string(ModelKind k) noexcept;

/// A parsed model file: the joint law, the test channel, and the input in
/// normalised form (defaults filled in, alphabets as sizes).
struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::Discrete;
  std::optional<DiscreteJointSource> discrete;
  std::optional<GaussianJointSource> gaussian;
  std::optional<TestChannel> channel;
  std::vector<std::string> warnings;
  nlohmann::json resolved;
};

/// Parses and validates a model document (schema in docs/model_schema.md).
/// Errors are ErrorCode::Validation (or MarginalMismatch) and name the
/// offending field as a JSON pointer.
ModelSpec parse_model(const nlohmann::json& doc);

/// Reads a file; syntax errors report line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
nlohmann::json parse_json_text(const std::string& text, const std::string& origin = "<input>");

ModelSpec load_model(const std::filesystem::path& path);

}  // namespace dht
