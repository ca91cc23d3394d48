#include "bsrk/run_log.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "bsrk/error.hpp"

namespace bsrk {

std::uint64_t file_digest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open for digest: " + path);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[65536];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
        if (!is) break;
    }
    return h;
}

void write_run_log(const std::string& artifact_path, const std::string& subcommand,
                   const std::vector<std::string>& inputs,
                   const std::vector<std::pair<std::string, std::string>>& params) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    nlohmann::json in = nlohmann::json::array();
    for (const auto& p : inputs) {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(file_digest(p)));
        in.push_back({{"path", p}, {"fnv1a", hex}});
    }
    j["inputs"] = in;
    nlohmann::json pj;
    for (const auto& [k, v] : params) pj[k] = v;
    j["params"] = pj;

    std::ofstream os(artifact_path + ".log.json");
    if (!os) throw data_error("cannot write run log for " + artifact_path);
    os << j.dump(2) << "\n";
}

} // namespace bsrk
