#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace hestopt::cli {

// FNV-1a 64-bit digest, hex encoded.
std::string digest_bytes(std::string_view bytes);
std::string digest_file(const std::string& path);

// Writes <output_path>.manifest.json next to an output file. The manifest
// records the command, resolved configuration, input digests, tool version
// and a timestamp; rerunning with identical inputs reproduces the output
// byte for byte.
void write_manifest(const std::string& command, const nlohmann::ordered_json& resolved_config,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths);

} // namespace hestopt::cli
