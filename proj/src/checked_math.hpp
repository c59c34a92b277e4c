// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// Overflow-checked 64-bit arithmetic. Block and FLOP counts must never
// wrap silently.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gemmlint::detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw std::overflow_error(std::string(what) + ": 64-bit overflow computing " +
                                  std::to_string(a) + " * " + std::to_string(b));
    }
    return out;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b, const char* what) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw std::overflow_error(std::string(what) + ": 64-bit overflow computing " +
                                  std::to_string(a) + " + " + std::to_string(b));
    }
    return out;
}

} // namespace gemmlint::detail
