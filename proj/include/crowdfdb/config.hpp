#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crowdfdb/simulator.hpp"

namespace crowdfdb {

/// Ordered "key = value" pairs with unique keys.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses flat "key = value" text. '#' starts a comment; blank lines are
/// ignored; a repeated key is an error.
KeyValues parse_key_values(std::istream& in, const std::string& source);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& kv);

/// Sets `key` (appending it when absent).
void set_value(KeyValues& kv, const std::string& key, const std::string& value);

/// Builds a config from key/values. Unknown keys are rejected; relative
/// file paths are resolved against `base_dir`.
ExperimentConfig config_from_key_values(const KeyValues& kv,
                                        const std::filesystem::path& base_dir = {});

/// Every field of `cfg`, in a fixed order. Feeding the result back through
/// config_from_key_values reproduces `cfg` exactly.
KeyValues to_key_values(const ExperimentConfig& cfg);

/// Resolved configuration plus provenance, written next to every results
/// file. Keys under "manifest." are metadata; everything else is config.
struct RunManifest {
  KeyValues config;
  std::string version;
  std::string created_at;
  std::filesystem::path results;
  std::filesystem::path summary;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace crowdfdb
