// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter-preserving shape search: nearby configurations with better
// predicted hardware efficiency, plus the targeted vocab-padding,
// head-count, and MLP-width helpers.

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gemmlint/rules.hpp"

namespace gemmlint {

enum class VaryField { A, H, Dff, V, T };
std::string to_string(VaryField f);
VaryField parse_vary_field(std::string_view text); // throws std::invalid_argument

struct SearchSpace {
    std::set<VaryField> vary;
    std::int64_t h_step = 64;
    int h_window_steps = 8;          // h0 +- h_window_steps * h_step
    std::int64_t d_ff_window = 1024; // d_ff0 +- window
    std::int64_t d_ff_step = 64;
    double budget_tolerance = 0.02;  // |param delta| / baseline params

    // Candidates whose predicted latency is within this fraction of the
    // fastest compliant candidate count as equally fast; the cost model's
    // penalty constants are heuristic, so differences inside this band
    // fall through to parameter delta and closeness to the original
    // shape. Divisibility compliance always ranks above latency.
    double latency_tie_tolerance = 0.35;
};

struct Candidate {
    TransformerConfig config;
    double param_delta_fraction = 0.0;
    double predicted_layer_latency_us = 0.0;
    RuleReport report;
    int rank = 0;
    bool is_baseline = false;
};

/// Exhaustive search over the space; keeps candidates that decompose,
/// carry zero error diagnostics, and stay inside the parameter budget
/// (component-breakdown parameter count, so swiglu budgets correctly).
/// Ranking: fewer warns, then predicted latency (compared as GPU-time
/// per replica, latency * t, with near-ties per latency_tie_tolerance),
/// then |param delta|, then closeness to the original config.
/// Deterministic; an empty result means no candidate survived the
/// filters, which is an outcome, not an error.
std::vector<Candidate> suggest(const TransformerConfig& cfg, const GpuSpec& gpu,
                               const SearchSpace& space,
                               const CalibrationTable* calibration = nullptr);

struct DffCandidate {
    std::int64_t d_ff = 0;
    double mlp_latency_us = 0.0;      // MlpUp + MlpGate + MlpDown predicted
    std::int64_t pow2_divisor = 0;    // of d_ff / t
};

/// Brute-force scan of d_ff in [round(ratio*h) - window, + window],
/// step 1, skipping values t does not divide. Ranked with the
/// alignment-compliant group (divisor >= 64) first, then by predicted
/// MLP latency, then by distance from the target.
std::vector<DffCandidate> swiglu_dff_search(std::int64_t h, double target_ratio,
                                            std::int64_t window, const GpuSpec& gpu,
                                            const TransformerConfig& context,
                                            const CalibrationTable* calibration = nullptr);

/// Smallest multiple of 64 that is >= v.
std::int64_t pad_vocab(std::int64_t v);

/// All head counts a' with h % a' == 0 and (h/a') % 64 == 0, sorted by
/// |a' - a| (larger a' first on ties). Empty when h % 64 != 0.
std::vector<std::int64_t> fix_heads(std::int64_t h, std::int64_t a);

} // namespace gemmlint
