// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal "key = value" file reader shared by the GPU and model config
// loaders. Lines are `key = value`, `#` starts a comment, blanks are
// ignored. Keys are unique; errors carry source:line.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "gemmlint/errors.hpp"

namespace gemmlint::detail {

class KvReader {
public:
    static KvReader from_file(const std::string& path);
    static KvReader from_text(std::string_view text, const std::string& source_name);

    bool has(const std::string& key) const;

    std::optional<std::string> get(const std::string& key) const;
    std::string require(const std::string& key) const; // throws ParseError naming the key

    std::int64_t require_int(const std::string& key) const;
    double require_real(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<double> get_real(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;

    /// Keys beginning with `prefix.`, mapped to their suffix.
    std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

    /// All keys, for unknown-key detection.
    const std::map<std::string, std::pair<std::string, int>>& entries() const { return entries_; }

    const std::string& source() const { return source_; }
    int line_of(const std::string& key) const;

private:
    std::string source_;
    std::map<std::string, std::pair<std::string, int>> entries_; // key -> (value, line)

    [[noreturn]] void fail(const std::string& key, const std::string& why) const;
};

std::string trim(std::string_view text);
std::int64_t parse_int(std::string_view text, const std::string& context);
double parse_real(std::string_view text, const std::string& context);

} // namespace gemmlint::detail
