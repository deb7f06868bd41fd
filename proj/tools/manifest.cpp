#include "manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hestopt/version.hpp"

namespace hestopt::cli {

std::string digest_bytes(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for digest: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return digest_bytes(ss.str());
}

void write_manifest(const std::string& command, const nlohmann::ordered_json& resolved_config,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths) {
    nlohmann::ordered_json manifest;
    manifest["command"] = command;
    manifest["tool_version"] = kVersion;
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    manifest["timestamp"] = stamp;
    manifest["resolved_config"] = resolved_config;

    auto& inputs = manifest["inputs"] = nlohmann::ordered_json::array();
    for (const auto& path : input_paths) {
        inputs.push_back({{"path", path}, {"digest", digest_file(path)}});
    }
    auto& outputs = manifest["outputs"] = nlohmann::ordered_json::array();
    for (const auto& path : output_paths) {
        outputs.push_back({{"path", path}, {"digest", digest_file(path)}});
    }

    for (const auto& path : output_paths) {
        std::ofstream out(path + ".manifest.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write manifest for " + path);
        out << manifest.dump(2) << "\n";
    }
}

} // namespace hestopt::cli
