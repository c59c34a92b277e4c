// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// Shape rules R1..R12: graded lint diagnostics for transformer
// configurations, with concrete machine-applicable fixes.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gemmlint/transformer.hpp"

namespace gemmlint {

enum class Severity { Info, Warn, Error };
std::string to_string(Severity s);

/// One finding. severity == Error exactly when the configuration is
/// ill-formed (a non-integral division); inefficiencies never error.
struct Diagnostic {
    std::string rule_id; // "R1".."R12"
    Severity severity = Severity::Info;
    std::string subject;  // config field expression or GEMM role name
    std::string observed; // display form of the offending value
    std::optional<std::int64_t> observed_value;
    std::optional<std::int64_t> pow2_divisor;
    std::string message;
    std::vector<std::int64_t> suggestions; // replacement values for the rule's field
};

struct LintOptions {
    double wave_threshold = 0.9; // R9 fires below this wave efficiency
};

struct RuleReport {
    TransformerConfig config;
    std::vector<Diagnostic> diagnostics; // ordered R1..R12
    int errors = 0;
    int warns = 0;
    int infos = 0;
    bool pass = false; // no errors and no warns

    const Diagnostic* first_for(std::string_view rule_id) const;
};

/// Evaluates every rule; never throws on ill-formed configs (those come
/// back as error diagnostics). Deterministic and side-effect free.
///
///   R1  v divisible by 64
///   R2  b*s power-of-two divisor >= 64
///   R3  h/a integral, power-of-two divisor >= 64 (info under flash)
///   R4  h/t integral, power-of-two divisor >= 64
///   R5  (b*a)/t integral (a/t under flash)
///   R6  reminder to keep t small (info when t > 1)
///   R7  L divisible by pipeline_stages
///   R8  per-GEMM tensor-core alignment of m, k, n
///   R9  per-GEMM wave efficiency at the selected tile
///   R10 d_ff/t integral; swiglu: power-of-two divisor >= 64
///   R11 flash attention guidance (maximize h)
///   R12 t == 6: power-of-two divisor of h/6 >= 64
RuleReport lint(const TransformerConfig& cfg, const GpuSpec& gpu, const LintOptions& options = {});

/// Rationale text for one rule. Throws std::invalid_argument on unknown ids.
std::string explain(const std::string& rule_id);

const std::vector<std::string>& all_rule_ids();

/// Returns cfg with the field the diagnostic's rule targets replaced by
/// value (R1 -> v, R3 -> a, R4/R12 -> h, R7 -> L, R10 -> d_ff). Throws
/// std::invalid_argument for rules that carry no applicable field.
TransformerConfig apply_suggestion(const TransformerConfig& cfg, const Diagnostic& diagnostic,
                                   std::int64_t value);

} // namespace gemmlint
