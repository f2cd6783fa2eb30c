#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dht::cli {

inline constexpr std::string_view kToolName = "dht_spectrum";
inline constexpr std::string_view kToolVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitResourceCap = 3;

/// 64-bit FNV-1a of the compact dump of `config`, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Runs one invocation; `args` excludes the program name. Data goes to `out`
/// (or to --out files), diagnostics and progress to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dht::cli
