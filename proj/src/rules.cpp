// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include "gemmlint/rules.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gemmlint {

// optimizer.hpp includes this module's header; declare the two helpers
// the suggestions need instead of including it back.
std::int64_t pad_vocab(std::int64_t v);
std::vector<std::int64_t> fix_heads(std::int64_t h, std::int64_t a);

namespace {

std::string format_eff(double value) {
    std::ostringstream out;
    out.precision(4);
    out << std::fixed << value;
    return out.str();
}

/// Nearest positive multiples of `unit` around `value`, sorted by
/// distance (larger value first on ties).
std::vector<std::int64_t> nearest_multiples(std::int64_t value, std::int64_t unit) {
    std::vector<std::int64_t> out;
    const std::int64_t down = value - value % unit;
    const std::int64_t up = down + unit;
    if (down >= unit) out.push_back(down);
    out.push_back(up);
    std::sort(out.begin(), out.end(), [&](std::int64_t x, std::int64_t y) {
        const std::int64_t dx = std::abs(x - value);
        const std::int64_t dy = std::abs(y - value);
        if (dx != dy) return dx < dy;
        return x > y;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const char* shortfall_tone(std::int64_t divisor) {
    // Worst degradation shows up at tiny power-of-two divisors.
    return divisor < 8 ? "; expect severe tensor-core underutilization" : "";
}

struct Lint {
    const TransformerConfig& cfg;
    const GpuSpec& gpu;
    const LintOptions& options;
    std::vector<Diagnostic> out;

    Diagnostic& add(std::string rule, Severity severity, std::string subject) {
        Diagnostic d;
        d.rule_id = std::move(rule);
        d.severity = severity;
        d.subject = std::move(subject);
        out.push_back(std::move(d));
        return out.back();
    }

    void rule_vocab() { // R1
        if (cfg.v % 64 == 0) return;
        Diagnostic& d = add("R1", Severity::Warn, "v");
        d.observed = std::to_string(cfg.v);
        d.observed_value = cfg.v;
        d.suggestions = {pad_vocab(cfg.v)};
        d.message = "vocabulary size " + std::to_string(cfg.v) +
                    " is not divisible by 64, so the logit GEMM misses tensor-core "
                    "alignment; pad to " +
                    std::to_string(d.suggestions.front());
    }

    void rule_bs() { // R2
        const std::int64_t bs = cfg.b * cfg.s;
        const std::int64_t divisor = largest_pow2_divisor(bs);
        if (divisor >= 64) return;
        Diagnostic& d = add("R2", Severity::Warn, "b*s");
        d.observed = std::to_string(bs);
        d.observed_value = bs;
        d.pow2_divisor = divisor;
        d.message = "b*s = " + std::to_string(bs) + " has largest power-of-two divisor " +
                    std::to_string(divisor) +
                    " (< 64); the shared GEMM m dimension limits tensor-core use" +
                    shortfall_tone(divisor) +
                    ". b itself need not be a power of two if s is one";
    }

    void rule_head_dim() { // R3 (downgraded by R11 under flash)
        if (cfg.h % cfg.a != 0) {
            Diagnostic& d = add("R3", Severity::Error, "h/a");
            d.observed = std::to_string(cfg.h) + "/" + std::to_string(cfg.a);
            d.message = "h/a is not integral (h=" + std::to_string(cfg.h) +
                        ", a=" + std::to_string(cfg.a) + "); the attention heads cannot split h";
            return;
        }
        const std::int64_t head_dim = cfg.h / cfg.a;
        const std::int64_t divisor = largest_pow2_divisor(head_dim);
        if (divisor >= 64) return;

        const bool flash = cfg.attention_impl == AttentionImpl::Flash;
        Diagnostic& d = add("R3", flash ? Severity::Info : Severity::Warn, "h/a");
        d.observed = std::to_string(head_dim);
        d.observed_value = head_dim;
        d.pow2_divisor = divisor;
        // Head counts within +-50% of the original that make h/a a
        // multiple of 64, nearest first.
        for (std::int64_t candidate : fix_heads(cfg.h, cfg.a)) {
            if (2 * candidate >= cfg.a && 2 * candidate <= 3 * cfg.a) {
                d.suggestions.push_back(candidate);
            }
        }
        d.message = "head dimension h/a = " + std::to_string(head_dim) +
                    " has largest power-of-two divisor " + std::to_string(divisor) +
                    " (< 64, and 64 is enough; larger multiples add nothing); attention "
                    "BMM dimensions miss tensor-core alignment" +
                    shortfall_tone(divisor);
        if (flash) {
            d.message += "; fused flash attention makes this mostly moot (see R11)";
        } else if (!d.suggestions.empty()) {
            d.message += "; nearby compliant head counts: a = ";
            for (std::size_t i = 0; i < d.suggestions.size(); ++i) {
                if (i) d.message += ", ";
                d.message += std::to_string(d.suggestions[i]);
            }
        }
    }

    void rule_hidden_per_gpu() { // R4
        if (cfg.h % cfg.t != 0) {
            Diagnostic& d = add("R4", Severity::Error, "h/t");
            d.observed = std::to_string(cfg.h) + "/" + std::to_string(cfg.t);
            d.message = "h/t is not integral (h=" + std::to_string(cfg.h) +
                        ", t=" + std::to_string(cfg.t) +
                        "); tensor parallelism cannot split the hidden dimension";
            return;
        }
        const std::int64_t per_gpu = cfg.h / cfg.t;
        const std::int64_t divisor = largest_pow2_divisor(per_gpu);
        if (divisor >= 64) return;
        Diagnostic& d = add("R4", Severity::Warn, "h/t");
        d.observed = std::to_string(per_gpu);
        d.observed_value = per_gpu;
        d.pow2_divisor = divisor;
        d.suggestions = nearest_multiples(cfg.h, 64 * cfg.t);
        d.message = "per-GPU hidden dimension h/t = " + std::to_string(per_gpu) +
                    " has largest power-of-two divisor " + std::to_string(divisor) +
                    " (< 64)" + shortfall_tone(divisor) + "; nearest aligned h: " +
                    std::to_string(d.suggestions.front());
    }

    void rule_bmm_batch() { // R5
        const bool flash = cfg.attention_impl == AttentionImpl::Flash;
        if ((cfg.b * cfg.a) % cfg.t != 0) {
            Diagnostic& d = add("R5", Severity::Error, "(b*a)/t");
            d.observed = std::to_string(cfg.b * cfg.a) + "/" + std::to_string(cfg.t);
            d.message = "(b*a)/t = " + std::to_string(cfg.b * cfg.a) + "/" +
                        std::to_string(cfg.t) +
                        " is not an integer; the attention BMM batch cannot be divided "
                        "across tensor-parallel ranks";
        }
        if (flash && cfg.a % cfg.t != 0) {
            Diagnostic& d = add("R5", Severity::Error, "a/t");
            d.observed = std::to_string(cfg.a) + "/" + std::to_string(cfg.t);
            d.message = "a/t = " + std::to_string(cfg.a) + "/" + std::to_string(cfg.t) +
                        " is not an integer; fused attention assigns whole heads per rank";
        }
    }

    void rule_tensor_parallel_size() { // R6
        if (cfg.t <= 1) return;
        Diagnostic& d = add("R6", Severity::Info, "t");
        d.observed = std::to_string(cfg.t);
        d.observed_value = cfg.t;
        d.message = "t = " + std::to_string(cfg.t) +
                    ": keep tensor parallelism as small as memory permits; every rank "
                    "shrinks the per-GPU GEMMs and adds communication";
    }

    void rule_pipeline() { // R7
        if (!cfg.pipeline_stages) return;
        const std::int64_t stages = *cfg.pipeline_stages;
        if (cfg.L % stages == 0) return;
        Diagnostic& d = add("R7", Severity::Warn, "L");
        d.observed = std::to_string(cfg.L);
        d.observed_value = cfg.L;
        d.suggestions = nearest_multiples(cfg.L, stages);
        d.message = "L = " + std::to_string(cfg.L) + " is not divisible by pipeline_stages = " +
                    std::to_string(stages) + "; stages will be imbalanced. Nearest: L = " +
                    std::to_string(d.suggestions.front());
    }

    void rule_gemm_alignment(const LayerDecomposition& dec) { // R8
        for (const LayerEntry* entry : dec.gemm_entries(true)) {
            const AlignmentReport report = alignment_report(*entry->gemm, gpu);
            if (report.all_aligned()) continue;
            std::int64_t worst = report.worst().pow2_divisor;
            std::string dims;
            for (const AlignmentEntry& e : report.dims) {
                if (e.aligned) continue;
                if (!dims.empty()) dims += ", ";
                dims += e.dim + "=" + std::to_string(e.value) + " (pow2 divisor " +
                        std::to_string(e.pow2_divisor) + ", need multiple of " +
                        std::to_string(e.required) + ")";
            }
            Diagnostic& d = add("R8", Severity::Warn, entry->label);
            d.observed = dims;
            d.pow2_divisor = worst;
            d.message = entry->label + ": dimensions not tensor-core aligned on " + gpu.name +
                        ": " + dims + shortfall_tone(worst);
        }
    }

    void rule_wave_quantization(const LayerDecomposition& dec) { // R9
        for (const LayerEntry* entry : dec.gemm_entries(true)) {
            const TileSpec tile = select_tile(*entry->gemm, gpu);
            const WaveStats waves = wave_stats(*entry->gemm, tile, gpu.sm_count);
            if (waves.wave_efficiency >= options.wave_threshold) continue;
            Diagnostic& d = add("R9", Severity::Warn, entry->label);
            d.observed = format_eff(waves.wave_efficiency);
            d.message = entry->label + ": wave efficiency " + format_eff(waves.wave_efficiency) +
                        " below threshold " + format_eff(options.wave_threshold) + " (" +
                        std::to_string(waves.total_blocks) + " blocks over " +
                        std::to_string(gpu.sm_count) + " SMs at tile " + to_string(tile) +
                        " leave a mostly idle tail wave)";
        }
    }

    void rule_dff(const std::int64_t dff) { // R10
        if (dff % cfg.t != 0) {
            Diagnostic& d = add("R10", Severity::Error, "d_ff/t");
            d.observed = std::to_string(dff) + "/" + std::to_string(cfg.t);
            d.message = "d_ff/t is not integral (d_ff=" + std::to_string(dff) +
                        ", t=" + std::to_string(cfg.t) +
                        "); tensor parallelism cannot split the MLP intermediate dimension";
            return;
        }
        if (cfg.activation != Activation::Swiglu) return;
        const std::int64_t per_gpu = dff / cfg.t;
        const std::int64_t divisor = largest_pow2_divisor(per_gpu);
        if (divisor >= 64) return;
        Diagnostic& d = add("R10", Severity::Warn, "d_ff/t");
        d.observed = std::to_string(per_gpu);
        d.observed_value = per_gpu;
        d.pow2_divisor = divisor;
        d.suggestions = nearest_multiples(dff, 64 * cfg.t);
        d.message = "d_ff/t = " + std::to_string(per_gpu) +
                    " has largest power-of-two divisor " + std::to_string(divisor) +
                    " (< 64); the conventional 8h/3 sizing breaks every MLP alignment" +
                    shortfall_tone(divisor) + "; nearest aligned d_ff: " +
                    std::to_string(d.suggestions.front()) +
                    " (the ratio is a convention, not a constraint)";
    }

    void rule_flash_guidance() { // R11
        if (cfg.attention_impl != AttentionImpl::Flash) return;
        Diagnostic& d = add("R11", Severity::Info, "attention_impl");
        d.observed = "flash";
        d.message = "fused flash attention follows a roofline in h: head-dimension "
                    "alignment matters little, so prefer increasing h toward compute "
                    "saturation; MLP guidance is unchanged";
    }

    void rule_six_gpu_nodes() { // R12
        if (cfg.t != 6 || cfg.h % 6 != 0) return;
        const std::int64_t per_gpu = cfg.h / 6;
        const std::int64_t divisor = largest_pow2_divisor(per_gpu);
        if (divisor >= 64) return;
        Diagnostic& d = add("R12", Severity::Warn, "h");
        d.observed = std::to_string(cfg.h);
        d.observed_value = cfg.h;
        d.pow2_divisor = divisor;
        d.suggestions = nearest_multiples(cfg.h, 384); // 6 * 64
        d.message = "t = 6 (6-GPU nodes): h = " + std::to_string(cfg.h) +
                    " gives h/6 = " + std::to_string(per_gpu) +
                    " with largest power-of-two divisor " + std::to_string(divisor) +
                    " (< 64); pick h divisible by both 6 and 64, e.g. " +
                    std::to_string(d.suggestions.front());
    }
};

} // namespace

std::string to_string(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Warn: return "warn";
        case Severity::Error: return "error";
    }
    return "unknown";
}

const Diagnostic* RuleReport::first_for(std::string_view rule_id) const {
    for (const Diagnostic& d : diagnostics) {
        if (d.rule_id == rule_id) return &d;
    }
    return nullptr;
}

RuleReport lint(const TransformerConfig& cfg, const GpuSpec& gpu, const LintOptions& options) {
    Lint pass{cfg, gpu, options, {}};

    pass.rule_vocab();          // R1
    pass.rule_bs();             // R2
    pass.rule_head_dim();       // R3
    pass.rule_hidden_per_gpu(); // R4
    pass.rule_bmm_batch();      // R5
    pass.rule_tensor_parallel_size(); // R6
    pass.rule_pipeline();       // R7
    const bool decomposable = divisibility_issues(cfg).empty();
    if (decomposable) {
        const LayerDecomposition dec = decompose(cfg);
        pass.rule_gemm_alignment(dec);    // R8
        pass.rule_wave_quantization(dec); // R9
    }
    pass.rule_dff(cfg.effective_d_ff()); // R10
    pass.rule_flash_guidance();          // R11
    pass.rule_six_gpu_nodes();           // R12

    RuleReport report;
    report.config = cfg;
    report.diagnostics = std::move(pass.out);
    for (const Diagnostic& d : report.diagnostics) {
        switch (d.severity) {
            case Severity::Error: ++report.errors; break;
            case Severity::Warn: ++report.warns; break;
            case Severity::Info: ++report.infos; break;
        }
    }
    report.pass = report.errors == 0 && report.warns == 0;
    return report;
}

TransformerConfig apply_suggestion(const TransformerConfig& cfg, const Diagnostic& diagnostic,
                                   std::int64_t value) {
    TransformerConfig out = cfg;
    if (diagnostic.rule_id == "R1") {
        out.v = value;
    } else if (diagnostic.rule_id == "R3") {
        out.a = value;
    } else if (diagnostic.rule_id == "R4" || diagnostic.rule_id == "R12") {
        out.h = value;
    } else if (diagnostic.rule_id == "R7") {
        out.L = value;
    } else if (diagnostic.rule_id == "R10") {
        out.d_ff = value;
    } else {
        throw std::invalid_argument("rule " + diagnostic.rule_id +
                                    " carries no applicable suggestion field");
    }
    return out;
}

const std::vector<std::string>& all_rule_ids() {
    static const std::vector<std::string> ids = {"R1", "R2", "R3", "R4",  "R5",  "R6",
                                                 "R7", "R8", "R9", "R10", "R11", "R12"};
    return ids;
}

std::string explain(const std::string& rule_id) {
    if (rule_id == "R1") {
        return "R1 (vocabulary alignment): the final projection multiplies the hidden "
               "state by a v-sized weight matrix. Tensor cores reach full throughput only "
               "when GEMM dimensions are multiples of the hardware alignment (128 bytes on "
               "A100-class parts, i.e. 64 fp16 elements). Padding v to the next multiple "
               "of 64 costs a sliver of memory and keeps the largest single GEMM in the "
               "model on the fast path.";
    }
    if (rule_id == "R2") {
        return "R2 (b*s alignment): the token dimension b*s is the m dimension of the QKV, "
               "projection, MLP, and logit GEMMs. It should be divisible by a power of two "
               "(64 is enough; more adds nothing). Since s is conventionally a large power "
               "of two, b itself does not need to be one. Separately, a larger microbatch "
               "enlarges every GEMM and generally helps throughput, but the right b is "
               "bounded by memory capacity, which this tool does not model; that part is "
               "advice, not a graded check.";
    }
    if (rule_id == "R3") {
        return "R3 (head dimension): the attention score and attention-over-value BMMs "
               "carry h/a as an inner or outer dimension. When h/a is not a multiple of 64 "
               "elements, tensor cores run below peak, and the penalty grows as the "
               "largest power-of-two divisor of h/a shrinks. Fixes that preserve the "
               "parameter count: change a so that h/a becomes a multiple of 64 (raising "
               "h/a by lowering a also enlarges each BMM, which these memory-bound kernels "
               "like), or use a fused flash-attention kernel (see R11).";
    }
    if (rule_id == "R4") {
        return "R4 (per-GPU hidden size): tensor parallelism divides weight matrices by t, "
               "so the GEMM dimensions that matter on each GPU are h/t-sized. h/t must be "
               "an integer and should be divisible by 64 to keep tensor cores fully fed.";
    }
    if (rule_id == "R5") {
        return "R5 (BMM batch integrality): attention runs as a batch of (b*a)/t "
               "independent small GEMMs per GPU. That count must be a whole number or the "
               "heads cannot be distributed across tensor-parallel ranks.";
    }
    if (rule_id == "R6") {
        return "R6 (tensor-parallel degree): every increase in t shrinks each per-GPU GEMM "
               "and adds synchronization, so GEMM efficiency and communication both argue "
               "for the smallest t that fits memory.";
    }
    if (rule_id == "R7") {
        return "R7 (pipeline balance): with pipeline parallelism the layers are split "
               "into equal stages; when L is not divisible by the stage count, the "
               "largest stage sets the pace and the rest idle.";
    }
    if (rule_id == "R8") {
        return "R8 (per-GEMM tensor-core alignment): each decomposed kernel is checked "
               "dimension by dimension against the GPU's alignment requirement (alignment "
               "bytes / element width, e.g. 64 fp16 elements on A100, 8 on V100). "
               "Misaligned dimensions force partially filled tensor-core fragments; "
               "larger power-of-two divisors degrade more gracefully.";
    }
    if (rule_id == "R9") {
        return "R9 (wave quantization): a kernel launches one thread block per output "
               "tile, scheduled onto the SMs in waves. If the block count is just past a "
               "multiple of the SM count, the last wave runs nearly as long as a full one "
               "while doing almost no work; 109 blocks on 108 SMs take two waves. "
               "Efficiency is blocks / (waves * SMs); below the threshold the shape is "
               "leaving large latency on the table.";
    }
    if (rule_id == "R10") {
        return "R10 (MLP intermediate size): gated activations with three MLP matrices "
               "conventionally shrink d_ff to 8h/3 to keep parameters constant, but that "
               "ratio usually lands on a badly aligned integer. The ratio is a suggestion, "
               "not a constraint: search nearby for a d_ff whose per-GPU value d_ff/t is a "
               "multiple of 64 (see the swiglu-search command).";
    }
    if (rule_id == "R11") {
        return "R11 (fused attention): fused flash-attention kernels stream K and V "
               "instead of materializing the score matrix, so their cost tracks a "
               "roofline in h rather than discrete tile boundaries. With them, head-dim "
               "alignment stops mattering much and the guidance simplifies to: make h as "
               "large as the parameter budget allows. MLP rules are unaffected.";
    }
    if (rule_id == "R12") {
        return "R12 (6-GPU nodes): machines with six GPUs per node push t = 6, and then "
               "h/t keeps a large power-of-two divisor only if h is divisible by both 6 "
               "and 64 (i.e. by 384). Shapes tuned for 8-GPU nodes often fail this, and a "
               "shape tuned for 6-GPU training may in turn deploy poorly on 2/4/8-GPU "
               "inference nodes; check both directions.";
    }
    throw std::invalid_argument("unknown rule id '" + rule_id + "' (known: R1..R12)");
}

} // namespace gemmlint
