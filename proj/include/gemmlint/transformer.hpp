// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// Maps a decoder-only transformer configuration onto the GEMM/BMM kernels
// that execute it, and computes parameter counts, per-layer FLOP totals,
// and per-component latency proportions.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gemmlint/gemm.hpp"

namespace gemmlint {

enum class Activation { GluLike, Swiglu };
enum class AttentionImpl { Standard, Flash };
enum class LayerLayout { Sequential, Parallel };
enum class Positional { Learned, Rotary, Alibi };

std::string to_string(Activation v);
std::string to_string(AttentionImpl v);
std::string to_string(LayerLayout v);
std::string to_string(Positional v);
Activation parse_activation(std::string_view text);
AttentionImpl parse_attention_impl(std::string_view text);
LayerLayout parse_layer_layout(std::string_view text);
Positional parse_positional(std::string_view text);

/// Model shape. Single-letter fields follow the conventional symbols:
/// a attention heads, b microbatch, h hidden size, L layers, s sequence
/// length, t tensor-parallel degree, v vocabulary size.
struct TransformerConfig {
    std::int64_t a = 1;
    std::int64_t b = 1;
    std::int64_t h = 0;
    std::int64_t L = 1;
    std::int64_t s = 2048;
    std::int64_t t = 1;
    std::int64_t v = 50304;

    double mlp_ratio = 4.0;              // d_ff = mlp_ratio * h unless overridden
    std::optional<std::int64_t> d_ff;    // explicit MLP intermediate size
    Activation activation = Activation::GluLike;
    AttentionImpl attention_impl = AttentionImpl::Standard;
    LayerLayout layer_layout = LayerLayout::Sequential;
    Positional positional = Positional::Learned; // metadata only, no GEMM impact
    std::optional<std::int64_t> pipeline_stages;
    bool vocab_parallel = false;         // split the logit GEMM's v by t
    std::string dtype = "fp16";

    /// d_ff if set; else round(8h/3) for swiglu, round(mlp_ratio * h) otherwise.
    std::int64_t effective_d_ff() const;

    void validate() const; // field ranges only; divisibility is checked elsewhere
};

enum class GemmRole {
    QkvTransform,
    AttentionScore,
    AttentionOverValue,
    LinearProjection,
    MlpUp,
    MlpGate,
    MlpDown,
    LogitOutput,
    FusedFlashAttention,
};
std::string role_name(GemmRole role);
std::optional<GemmRole> parse_role(std::string_view text);

/// Fused attention kernel metadata: no discrete GEMM tiling, costed by
/// roofline only (reads Q, K, V once and writes O once).
struct FlashAttentionShape {
    std::int64_t b = 0;
    std::int64_t heads_per_gpu = 0; // a / t
    std::int64_t s = 0;
    std::int64_t head_dim = 0;      // h / a
    std::string dtype = "fp16";

    std::int64_t flop_count() const;  // 4 * b * heads * s^2 * head_dim
    std::int64_t byte_count() const;  // 4 * b * heads * s * head_dim * width
};

/// One step of the layer: a GEMM-backed operator, a fused attention
/// kernel, or a zero-cost marker (embedding lookup, layer norms).
struct LayerEntry {
    std::string label;
    std::optional<GemmRole> role;            // nullopt for markers
    std::optional<GemmShape> gemm;           // set for GEMM-backed roles
    std::optional<FlashAttentionShape> flash;

    bool is_marker() const { return !role.has_value(); }
};

struct LayerDecomposition {
    std::vector<LayerEntry> entries; // one layer, in execution order, markers included
    LayerEntry logit;                // model-level output projection

    /// GEMM-backed entries only, logit last when included.
    std::vector<const LayerEntry*> gemm_entries(bool include_logit) const;
};

struct DivisibilityIssue {
    std::string quotient; // "h/a", "h/t", "3h/t", "(b*a)/t", "d_ff/t", "a/t", "v/t"
    std::string detail;
};

/// Integral-division requirements the decomposition depends on. Empty
/// means decompose() succeeds; the rules engine maps each entry to an
/// error diagnostic. Shared so lint and decompose can never disagree.
std::vector<DivisibilityIssue> divisibility_issues(const TransformerConfig& cfg);

/// Per-GPU kernel shapes for one layer plus the logit projection:
///   QkvTransform       (b*s, h)      x (h, 3h/t)
///   AttentionScore     batch (b*a)/t, (s, h/a) x (h/a, s)
///   AttentionOverValue batch (b*a)/t, (s, s)   x (s, h/a)
///   LinearProjection   (b*s, h/t)    x (h/t, h)
///   MlpUp / MlpGate    (b*s, h)      x (h, d_ff/t)
///   MlpDown            (b*s, d_ff/t) x (d_ff/t, h)
///   LogitOutput        (b*s, h)      x (h, v)   [v/t when vocab_parallel]
/// Flash attention replaces the two BMMs with one fused entry.
/// Throws std::invalid_argument naming the offending quotient(s).
LayerDecomposition decompose(const TransformerConfig& cfg);

struct ParamCount {
    std::int64_t exact = 0;  // closed form for the canonical shape, else breakdown sum
    std::int64_t approx = 0; // 12 h^2 L
    // component breakdown
    std::int64_t qkv = 0;              // 3 h^2 per layer
    std::int64_t attn_proj = 0;        // h^2 per layer
    std::int64_t mlp = 0;              // 2 h d_ff per layer, 3 h d_ff for swiglu
    std::int64_t norms_and_biases = 0; // 13 h per layer
    std::int64_t embeddings = 0;       // (v + s) h

    std::int64_t breakdown_total() const;
};

/// Canonical shapes (glu_like, d_ff == 4h) use the closed form
/// 12 h^2 L + 13 h L + (v+s) h, which the breakdown reproduces exactly.
ParamCount param_count(const TransformerConfig& cfg);

/// Forward-pass compute for one layer across the whole replica:
/// 24 b s h^2 + 4 b s^2 h. Matches the decomposition's FLOP sum times t
/// (logit excluded) for canonical shapes.
std::int64_t forward_flops_per_layer(const TransformerConfig& cfg);

/// Share of predicted single-layer latency per GEMM role; sums to 1.
/// Parallel attention/MLP layout changes kernel count, not modeled cost.
std::map<GemmRole, double> latency_proportions(const TransformerConfig& cfg, const GpuSpec& gpu,
                                               const CalibrationTable* calibration = nullptr);

/// Sum of per-layer predicted kernel latencies in microseconds (logit excluded).
double predicted_layer_latency_us(const TransformerConfig& cfg, const GpuSpec& gpu,
                                  const CalibrationTable* calibration = nullptr);

/// Key-value config file mirroring the field names above.
TransformerConfig load_transformer_config(const std::string& path);

} // namespace gemmlint
