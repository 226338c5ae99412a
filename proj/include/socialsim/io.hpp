#ifndef SOCIALSIM_IO_HPP
#define SOCIALSIM_IO_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "core.hpp"

namespace socialsim {

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

namespace detail {

template <class Fn>
void for_each_jsonl_line(const std::string& source, const std::string& text, Fn&& fn) {
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0, records = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        if (!j.is_object()) throw ParseError(source + ":" + std::to_string(lineno) + ": expected a JSON object");
        try {
            fn(j, lineno);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ++records;
    }
    if (records == 0) throw ParseError(source + ": file contains no records");
}

}  // namespace detail

}  // namespace socialsim

#endif  // SOCIALSIM_IO_HPP
