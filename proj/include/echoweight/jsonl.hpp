#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "echoweight/error.hpp"

namespace echoweight::jsonl {

using json = nlohmann::json;

/// Calls fn(record, line_number) for each non-blank line. Throws ParseError on bad JSON.
inline void for_each_record(const std::filesystem::path& path,
                            const std::function<void(const json&, std::size_t)>& fn)
{
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
        if (!record.is_object()) throw ParseError(path.string(), lineno, "record is not a JSON object");
        fn(record, lineno);
    }
}

/// Typed field access with line-numbered errors.
class Fields {
public:
    Fields(const json& record, const std::filesystem::path& path, std::size_t line)
        : record_(record), path_(path.string()), line_(line)
    {}

    std::string string(const char* key) const
    {
        const json& v = require(key);
        if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
        return v.get<std::string>();
    }

    std::int64_t integer(const char* key) const
    {
        const json& v = require(key);
        if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
        return v.get<std::int64_t>();
    }

    bool boolean(const char* key) const
    {
        const json& v = require(key);
        if (!v.is_boolean()) fail(std::string("field '") + key + "' must be a boolean");
        return v.get<bool>();
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, line_, what); }

private:
    const json& require(const char* key) const
    {
        auto it = record_.find(key);
        if (it == record_.end()) fail(std::string("missing field '") + key + "'");
        return *it;
    }

    const json& record_;
    std::string path_;
    std::size_t line_;
};

inline std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace echoweight::jsonl
