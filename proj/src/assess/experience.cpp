#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <fcntl.h>
#include <unistd.h>

#include <fmt/format.h>

#include "json.hpp"
#include "selfx/assess.hpp"

namespace selfx::assess {

using ordered_json = nlohmann::ordered_json;

ExperienceRecord parse_experience_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
        throw Error(fmt::format("malformed experience record: {}", e.what()));
    }
    if (!j.is_object()) throw Error("experience record must be an object");
    for (const auto& [key, _] : j.items())
        if (key != "behavior" && key != "features" && key != "outcome")
            throw Error(fmt::format("unknown key '{}' in experience record", key));
    if (!j.contains("behavior") || !j["behavior"].is_string()) throw Error("experience record needs a behavior name");
    if (!j.contains("features") || !j["features"].is_object()) throw Error("experience record needs a features object");
    if (!j.contains("outcome") || !j["outcome"].is_number_integer()) throw Error("experience outcome must be 0 or 1");

    ExperienceRecord r;
    r.behavior = j["behavior"].get<std::string>();
    for (const auto& [name, v] : j["features"].items()) {
        if (!v.is_number()) throw Error(fmt::format("feature '{}' is not a number", name));
        r.features.emplace_back(name, v.get<double>());
    }
    const auto outcome = j["outcome"].get<long long>();
    if (outcome != 0 && outcome != 1) throw Error("experience outcome must be 0 or 1");
    r.outcome = outcome == 1;
    return r;
}

std::string format_experience_line(const ExperienceRecord& record) {
    ordered_json j;
    j["behavior"] = record.behavior;
    j["features"] = ordered_json::object();
    for (const auto& [name, v] : record.features) {
        if (!std::isfinite(v)) throw Error(fmt::format("feature '{}' is not finite", name));
        j["features"][name] = v;
    }
    j["outcome"] = record.outcome ? 1 : 0;
    return j.dump();
}

std::vector<ExperienceRecord> read_experience_log(const std::string& path) {
    std::vector<ExperienceRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(parse_experience_line(line));
        } catch (const Error& e) {
            throw Error(fmt::format("{}:{}: {}", path, n, e.what()));
        }
    }
    return out;
}

std::vector<ExperienceRecord> records_for(const std::vector<ExperienceRecord>& log, std::string_view behavior) {
    std::vector<ExperienceRecord> out;
    for (const auto& r : log)
        if (r.behavior == behavior) out.push_back(r);
    return out;
}

namespace {

std::vector<std::string> names_of(const ExperienceRecord& r) {
    std::vector<std::string> out;
    for (const auto& f : r.features) out.push_back(f.first);
    return out;
}

}  // namespace

std::size_t append_experience(const std::string& path, const ExperienceRecord& record) {
    if (record.behavior.empty()) throw Error("experience record needs a behavior name");
    std::set<std::string> distinct;
    for (const auto& f : record.features)
        if (!distinct.insert(f.first).second) throw Error(fmt::format("feature '{}' appears twice", f.first));

    auto log = read_experience_log(path);
    for (const auto& r : log)
        if (r.behavior == record.behavior && names_of(r) != names_of(record))
            throw Error(fmt::format("features of '{}' do not match the existing log", record.behavior));

    std::string line = format_experience_line(record) + "\n";
    {
        std::ifstream tail(path, std::ios::binary | std::ios::ate);
        if (tail && tail.tellg() > 0) {
            tail.seekg(-1, std::ios::end);
            if (tail.get() != '\n') line.insert(line.begin(), '\n');
        }
    }
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw Error(fmt::format("cannot open '{}' for appending", path));
    std::size_t done = 0;
    while (done < line.size()) {
        ssize_t w = ::write(fd, line.data() + done, line.size() - done);
        if (w < 0) {
            ::close(fd);
            throw Error(fmt::format("cannot write '{}'", path));
        }
        done += static_cast<std::size_t>(w);
    }
    bool synced = ::fsync(fd) == 0;
    ::close(fd);
    if (!synced) throw Error(fmt::format("cannot sync '{}'", path));
    return log.size() + 1;
}

}  // namespace selfx::assess
