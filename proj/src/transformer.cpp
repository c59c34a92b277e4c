// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include "gemmlint/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gemmlint/calibration.hpp"
#include "checked_math.hpp"
#include "kv_reader.hpp"

namespace gemmlint {

namespace {

using detail::checked_add;
using detail::checked_mul;

[[noreturn]] void bad_enum(const char* what, std::string_view got) {
    throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(got) + "'");
}

} // namespace

std::string to_string(Activation v) { return v == Activation::Swiglu ? "swiglu" : "glu_like"; }
std::string to_string(AttentionImpl v) {
    return v == AttentionImpl::Flash ? "flash" : "standard";
}
std::string to_string(LayerLayout v) {
    return v == LayerLayout::Parallel ? "parallel" : "sequential";
}
std::string to_string(Positional v) {
    switch (v) {
        case Positional::Rotary: return "rotary";
        case Positional::Alibi: return "alibi";
        default: return "learned";
    }
}

Activation parse_activation(std::string_view text) {
    if (text == "glu_like") return Activation::GluLike;
    if (text == "swiglu") return Activation::Swiglu;
    bad_enum("activation", text);
}

AttentionImpl parse_attention_impl(std::string_view text) {
    if (text == "standard") return AttentionImpl::Standard;
    if (text == "flash") return AttentionImpl::Flash;
    bad_enum("attention_impl", text);
}

LayerLayout parse_layer_layout(std::string_view text) {
    if (text == "sequential") return LayerLayout::Sequential;
    if (text == "parallel") return LayerLayout::Parallel;
    bad_enum("layer_layout", text);
}

Positional parse_positional(std::string_view text) {
    if (text == "learned") return Positional::Learned;
    if (text == "rotary") return Positional::Rotary;
    if (text == "alibi") return Positional::Alibi;
    bad_enum("positional", text);
}

std::string role_name(GemmRole role) {
    switch (role) {
        case GemmRole::QkvTransform: return "qkv_transform";
        case GemmRole::AttentionScore: return "attention_score";
        case GemmRole::AttentionOverValue: return "attention_over_value";
        case GemmRole::LinearProjection: return "linear_projection";
        case GemmRole::MlpUp: return "mlp_up";
        case GemmRole::MlpGate: return "mlp_gate";
        case GemmRole::MlpDown: return "mlp_down";
        case GemmRole::LogitOutput: return "logit_output";
        case GemmRole::FusedFlashAttention: return "fused_flash_attention";
    }
    return "unknown";
}

std::optional<GemmRole> parse_role(std::string_view text) {
    static const GemmRole all[] = {
        GemmRole::QkvTransform,    GemmRole::AttentionScore, GemmRole::AttentionOverValue,
        GemmRole::LinearProjection, GemmRole::MlpUp,          GemmRole::MlpGate,
        GemmRole::MlpDown,          GemmRole::LogitOutput,    GemmRole::FusedFlashAttention,
    };
    for (GemmRole role : all) {
        if (role_name(role) == text) return role;
    }
    return std::nullopt;
}

std::int64_t TransformerConfig::effective_d_ff() const {
    if (d_ff) return *d_ff;
    if (activation == Activation::Swiglu) {
        // round(8h/3), computed exactly in integers
        return (16 * h + 3) / 6;
    }
    return std::llround(mlp_ratio * static_cast<double>(h));
}

void TransformerConfig::validate() const {
    auto positive = [](const char* field, std::int64_t value) {
        if (value < 1) {
            throw std::invalid_argument(std::string("config field '") + field +
                                        "' must be >= 1, got " + std::to_string(value));
        }
    };
    positive("a", a);
    positive("b", b);
    positive("h", h);
    positive("L", L);
    positive("s", s);
    positive("t", t);
    positive("v", v);
    if (d_ff) positive("d_ff", *d_ff);
    if (pipeline_stages) positive("pipeline_stages", *pipeline_stages);
    if (!d_ff && mlp_ratio <= 0.0) {
        throw std::invalid_argument("config field 'mlp_ratio' must be positive");
    }
    require_dtype(dtype);
}

std::int64_t FlashAttentionShape::flop_count() const {
    std::int64_t out = checked_mul(4, b, "flash flops");
    out = checked_mul(out, heads_per_gpu, "flash flops");
    out = checked_mul(out, s, "flash flops");
    out = checked_mul(out, s, "flash flops");
    return checked_mul(out, head_dim, "flash flops");
}

std::int64_t FlashAttentionShape::byte_count() const {
    // Q, K, V read once, O written once
    std::int64_t elems = checked_mul(4, b, "flash bytes");
    elems = checked_mul(elems, heads_per_gpu, "flash bytes");
    elems = checked_mul(elems, s, "flash bytes");
    elems = checked_mul(elems, head_dim, "flash bytes");
    return checked_mul(elems, require_dtype(dtype).bytes_per_element, "flash bytes");
}

std::vector<const LayerEntry*> LayerDecomposition::gemm_entries(bool include_logit) const {
    std::vector<const LayerEntry*> out;
    for (const LayerEntry& entry : entries) {
        if (entry.gemm) out.push_back(&entry);
    }
    if (include_logit && logit.gemm) out.push_back(&logit);
    return out;
}

std::vector<DivisibilityIssue> divisibility_issues(const TransformerConfig& cfg) {
    cfg.validate();
    std::vector<DivisibilityIssue> issues;
    auto need = [&](bool ok, const char* quotient, std::string detail) {
        if (!ok) issues.push_back({quotient, std::move(detail)});
    };

    need(cfg.h % cfg.a == 0, "h/a",
         "h=" + std::to_string(cfg.h) + " is not divisible by a=" + std::to_string(cfg.a));
    need(cfg.h % cfg.t == 0, "h/t",
         "h=" + std::to_string(cfg.h) + " is not divisible by t=" + std::to_string(cfg.t));
    need((3 * cfg.h) % cfg.t == 0, "3h/t",
         "3h=" + std::to_string(3 * cfg.h) + " is not divisible by t=" + std::to_string(cfg.t));
    need((cfg.b * cfg.a) % cfg.t == 0, "(b*a)/t",
         "b*a=" + std::to_string(cfg.b * cfg.a) + " is not divisible by t=" +
             std::to_string(cfg.t));
    need(cfg.effective_d_ff() % cfg.t == 0, "d_ff/t",
         "d_ff=" + std::to_string(cfg.effective_d_ff()) + " is not divisible by t=" +
             std::to_string(cfg.t));
    if (cfg.attention_impl == AttentionImpl::Flash) {
        need(cfg.a % cfg.t == 0, "a/t",
             "fused attention splits heads across GPUs; a=" + std::to_string(cfg.a) +
                 " is not divisible by t=" + std::to_string(cfg.t));
    }
    if (cfg.vocab_parallel) {
        need(cfg.v % cfg.t == 0, "v/t",
             "vocab-parallel logit requires v=" + std::to_string(cfg.v) +
                 " divisible by t=" + std::to_string(cfg.t));
    }
    return issues;
}

LayerDecomposition decompose(const TransformerConfig& cfg) {
    const auto issues = divisibility_issues(cfg);
    if (!issues.empty()) {
        std::string message = "config does not decompose:";
        for (const DivisibilityIssue& issue : issues) {
            message += " [" + issue.quotient + " not integral: " + issue.detail + "]";
        }
        throw std::invalid_argument(message);
    }

    const std::int64_t bs = checked_mul(cfg.b, cfg.s, "decompose");
    const std::int64_t head_dim = cfg.h / cfg.a;
    const std::int64_t bmm_batch = (cfg.b * cfg.a) / cfg.t;
    const std::int64_t dff_per_gpu = cfg.effective_d_ff() / cfg.t;

    auto gemm = [&](GemmRole role, std::int64_t m, std::int64_t k, std::int64_t n,
                    std::int64_t batch = 1) {
        LayerEntry entry;
        entry.label = role_name(role);
        entry.role = role;
        entry.gemm = GemmShape{m, k, n, batch, cfg.dtype, 1.0, 0.0};
        return entry;
    };
    auto marker = [&](const char* label) {
        LayerEntry entry;
        entry.label = label;
        return entry;
    };

    LayerDecomposition dec;
    dec.entries.push_back(marker("input_embedding"));
    dec.entries.push_back(marker("layer_norm_1"));
    dec.entries.push_back(gemm(GemmRole::QkvTransform, bs, cfg.h, 3 * cfg.h / cfg.t));
    if (cfg.attention_impl == AttentionImpl::Flash) {
        LayerEntry entry;
        entry.label = role_name(GemmRole::FusedFlashAttention);
        entry.role = GemmRole::FusedFlashAttention;
        entry.flash = FlashAttentionShape{cfg.b, cfg.a / cfg.t, cfg.s, head_dim, cfg.dtype};
        dec.entries.push_back(std::move(entry));
    } else {
        dec.entries.push_back(
            gemm(GemmRole::AttentionScore, cfg.s, head_dim, cfg.s, bmm_batch));
        dec.entries.push_back(
            gemm(GemmRole::AttentionOverValue, cfg.s, cfg.s, head_dim, bmm_batch));
    }
    dec.entries.push_back(gemm(GemmRole::LinearProjection, bs, cfg.h / cfg.t, cfg.h));
    dec.entries.push_back(marker("layer_norm_2"));
    dec.entries.push_back(gemm(GemmRole::MlpUp, bs, cfg.h, dff_per_gpu));
    if (cfg.activation == Activation::Swiglu) {
        dec.entries.push_back(gemm(GemmRole::MlpGate, bs, cfg.h, dff_per_gpu));
    }
    dec.entries.push_back(gemm(GemmRole::MlpDown, bs, dff_per_gpu, cfg.h));

    const std::int64_t logit_n = cfg.vocab_parallel ? cfg.v / cfg.t : cfg.v;
    dec.logit = gemm(GemmRole::LogitOutput, bs, cfg.h, logit_n);
    return dec;
}

std::int64_t ParamCount::breakdown_total() const {
    return qkv + attn_proj + mlp + norms_and_biases + embeddings;
}

ParamCount param_count(const TransformerConfig& cfg) {
    cfg.validate();
    const std::int64_t h = cfg.h;
    const std::int64_t dff = cfg.effective_d_ff();
    const std::int64_t mlp_matrices = cfg.activation == Activation::Swiglu ? 3 : 2;

    ParamCount out;
    out.qkv = checked_mul(checked_mul(3 * h, h, "param_count"), cfg.L, "param_count");
    out.attn_proj = checked_mul(checked_mul(h, h, "param_count"), cfg.L, "param_count");
    out.mlp = checked_mul(checked_mul(checked_mul(mlp_matrices, h, "param_count"), dff,
                                      "param_count"),
                          cfg.L, "param_count");
    out.norms_and_biases = checked_mul(13 * h, cfg.L, "param_count");
    out.embeddings = checked_mul(cfg.v + cfg.s, h, "param_count");
    out.approx = checked_mul(checked_mul(checked_mul(std::int64_t{12}, h, "param_count"), h,
                                         "param_count"),
                             cfg.L, "param_count");

    const bool canonical = cfg.activation == Activation::GluLike && dff == 4 * h;
    if (canonical) {
        // 12 h^2 L + 13 h L + (v + s) h
        out.exact = checked_add(checked_add(out.approx, out.norms_and_biases, "param_count"),
                                out.embeddings, "param_count");
    } else {
        out.exact = out.breakdown_total();
    }
    return out;
}

std::int64_t forward_flops_per_layer(const TransformerConfig& cfg) {
    cfg.validate();
    // 24 b s h^2 + 4 b s^2 h
    const std::int64_t bsh = checked_mul(checked_mul(cfg.b, cfg.s, "layer_flops"), cfg.h,
                                         "layer_flops");
    const std::int64_t dense = checked_mul(checked_mul(24, bsh, "layer_flops"), cfg.h,
                                           "layer_flops");
    const std::int64_t attention = checked_mul(checked_mul(4, bsh, "layer_flops"), cfg.s,
                                               "layer_flops");
    return checked_add(dense, attention, "layer_flops");
}

namespace {

double entry_latency_us(const LayerEntry& entry, const GpuSpec& gpu,
                        const CalibrationTable* calibration) {
    if (entry.flash) {
        // Fused kernel: pure roofline, no tile or wave quantization terms.
        const double peak = gpu.peak_for(entry.flash->dtype);
        const double work = static_cast<double>(entry.flash->flop_count());
        const double intensity = work / static_cast<double>(entry.flash->byte_count());
        const double tflops = std::min(peak, intensity * gpu.mem_bandwidth_gbps / 1000.0);
        return work / (tflops * 1e6);
    }
    return estimate_throughput(*entry.gemm, gpu, calibration).latency_us;
}

} // namespace

std::map<GemmRole, double> latency_proportions(const TransformerConfig& cfg, const GpuSpec& gpu,
                                               const CalibrationTable* calibration) {
    const LayerDecomposition dec = decompose(cfg);
    std::map<GemmRole, double> latency;
    double total = 0.0;
    for (const LayerEntry& entry : dec.entries) {
        if (entry.is_marker()) continue;
        const double us = entry_latency_us(entry, gpu, calibration);
        latency[*entry.role] += us;
        total += us;
    }
    for (auto& [role, us] : latency) us /= total;
    return latency;
}

double predicted_layer_latency_us(const TransformerConfig& cfg, const GpuSpec& gpu,
                                  const CalibrationTable* calibration) {
    const LayerDecomposition dec = decompose(cfg);
    double total = 0.0;
    for (const LayerEntry& entry : dec.entries) {
        if (entry.is_marker()) continue;
        total += entry_latency_us(entry, gpu, calibration);
    }
    return total;
}

TransformerConfig load_transformer_config(const std::string& path) {
    const auto kv = detail::KvReader::from_file(path);

    static const std::vector<std::string> known = {
        "a", "b", "h", "L", "s", "t", "v", "mlp_ratio", "d_ff", "activation",
        "attention_impl", "layer_layout", "positional", "pipeline_stages",
        "vocab_parallel", "dtype",
    };
    for (const auto& [key, entry] : kv.entries()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParseError(path + ":" + std::to_string(entry.second) + ": unknown field '" +
                             key + "'");
        }
    }

    TransformerConfig cfg;
    if (auto value = kv.get_int("a")) cfg.a = *value;
    if (auto value = kv.get_int("b")) cfg.b = *value;
    cfg.h = kv.require_int("h");
    if (auto value = kv.get_int("L")) cfg.L = *value;
    if (auto value = kv.get_int("s")) cfg.s = *value;
    if (auto value = kv.get_int("t")) cfg.t = *value;
    if (auto value = kv.get_int("v")) cfg.v = *value;
    if (auto value = kv.get_real("mlp_ratio")) cfg.mlp_ratio = *value;
    if (auto value = kv.get_int("d_ff")) cfg.d_ff = *value;
    if (auto value = kv.get("activation")) cfg.activation = parse_activation(*value);
    if (auto value = kv.get("attention_impl")) cfg.attention_impl = parse_attention_impl(*value);
    if (auto value = kv.get("layer_layout")) cfg.layer_layout = parse_layer_layout(*value);
    if (auto value = kv.get("positional")) cfg.positional = parse_positional(*value);
    if (auto value = kv.get_int("pipeline_stages")) cfg.pipeline_stages = *value;
    if (auto value = kv.get_bool("vocab_parallel")) cfg.vocab_parallel = *value;
    if (auto value = kv.get("dtype")) cfg.dtype = *value;

    cfg.validate();
    return cfg;
}

} // namespace gemmlint
