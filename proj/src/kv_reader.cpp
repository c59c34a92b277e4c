// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include "kv_reader.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gemmlint::detail {

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

std::int64_t parse_int(std::string_view text, const std::string& context) {
    const std::string value = trim(text);
    std::int64_t out = 0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last || value.empty()) {
        throw ParseError(context + ": expected an integer, got '" + value + "'");
    }
    return out;
}

double parse_real(std::string_view text, const std::string& context) {
    const std::string value = trim(text);
    if (value.empty()) throw ParseError(context + ": expected a number, got ''");
    char* end = nullptr;
    const double out = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size()) {
        throw ParseError(context + ": expected a number, got '" + value + "'");
    }
    return out;
}

KvReader KvReader::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str(), path);
}

KvReader KvReader::from_text(std::string_view text, const std::string& source_name) {
    KvReader reader;
    reader.source_ = source_name;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;

        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source_name + ":" + std::to_string(line_no) +
                             ": expected 'key = value', got '" + stripped + "'");
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": empty key");
        }
        if (reader.entries_.count(key)) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": duplicate key '" +
                             key + "'");
        }
        reader.entries_[key] = {value, line_no};
    }
    return reader;
}

bool KvReader::has(const std::string& key) const { return entries_.count(key) != 0; }

std::optional<std::string> KvReader::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.first;
}

std::string KvReader::require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) fail(key, "missing required field");
    return it->second.first;
}

std::int64_t KvReader::require_int(const std::string& key) const {
    return parse_int(require(key), source_ + ": field '" + key + "'");
}

double KvReader::require_real(const std::string& key) const {
    return parse_real(require(key), source_ + ": field '" + key + "'");
}

std::optional<std::int64_t> KvReader::get_int(const std::string& key) const {
    auto value = get(key);
    if (!value) return std::nullopt;
    return parse_int(*value, source_ + ": field '" + key + "'");
}

std::optional<double> KvReader::get_real(const std::string& key) const {
    auto value = get(key);
    if (!value) return std::nullopt;
    return parse_real(*value, source_ + ": field '" + key + "'");
}

std::optional<bool> KvReader::get_bool(const std::string& key) const {
    auto value = get(key);
    if (!value) return std::nullopt;
    if (*value == "true" || *value == "1" || *value == "yes") return true;
    if (*value == "false" || *value == "0" || *value == "no") return false;
    fail(key, "expected a boolean (true/false), got '" + *value + "'");
}

std::map<std::string, std::string> KvReader::with_prefix(const std::string& prefix) const {
    std::map<std::string, std::string> out;
    const std::string full = prefix + ".";
    for (const auto& [key, value] : entries_) {
        if (key.rfind(full, 0) == 0 && key.size() > full.size()) {
            out[key.substr(full.size())] = value.first;
        }
    }
    return out;
}

int KvReader::line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.second;
}

void KvReader::fail(const std::string& key, const std::string& why) const {
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        throw ParseError(source_ + ":" + std::to_string(it->second.second) + ": " + why +
                         " ('" + key + "')");
    }
    throw ParseError(source_ + ": " + why + " ('" + key + "')");
}

} // namespace gemmlint::detail
