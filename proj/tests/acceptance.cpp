// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks, one printed line per criterion. Exact
// integer identities carry zero tolerance; the few floating checks state
// theirs inline.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gemmlint/calibration.hpp"
#include "gemmlint/optimizer.hpp"
#include "gemmlint/rules.hpp"
#include "oracles.hpp"

using namespace gemmlint;
namespace oracle = gemmlint::testing;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw Failure(message);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const GpuSpec kA100 = *find_gpu("A100");

TransformerConfig gpt3_2p7b() {
    TransformerConfig cfg;
    cfg.h = 2560;
    cfg.a = 32;
    cfg.b = 4;
    cfg.s = 2048;
    cfg.t = 1;
    cfg.L = 32;
    cfg.v = 50304;
    return cfg;
}

// --- criterion 1 -----------------------------------------------------------
// t * sum of per-GPU decomposed GEMM FLOPs (logit excluded) equals
// 24 b s h^2 + 4 b s^2 h exactly, over 100 randomized canonical configs.
void criterion_flop_identity() {
    const auto start = std::chrono::steady_clock::now();
    oracle::CanonicalConfigSource source(1);
    for (int i = 0; i < 100; ++i) {
        const TransformerConfig cfg = source.next();
        const LayerDecomposition dec = decompose(cfg);
        std::int64_t per_gpu = 0;
        for (const LayerEntry* entry : dec.gemm_entries(false)) {
            per_gpu += flops(*entry->gemm);
        }
        const std::int64_t lhs = per_gpu * cfg.t;
        const std::int64_t rhs =
            24 * cfg.b * cfg.s * cfg.h * cfg.h + 4 * cfg.b * cfg.s * cfg.s * cfg.h;
        require(lhs == rhs, "config " + std::to_string(i) + " (h=" + std::to_string(cfg.h) +
                                ", a=" + std::to_string(cfg.a) + ", b=" + std::to_string(cfg.b) +
                                ", s=" + std::to_string(cfg.s) + ", t=" + std::to_string(cfg.t) +
                                "): decomposed " + std::to_string(lhs) + " != formula " +
                                std::to_string(rhs));
    }
    require(seconds_since(start) < 1.0, "exceeded the 1 s budget");
}

// --- criterion 2 -----------------------------------------------------------
// Component breakdown equals 12 h^2 L + 13 h L + (v+s) h exactly.
void criterion_param_formula() {
    oracle::CanonicalConfigSource source(2);
    for (int i = 0; i < 100; ++i) {
        const TransformerConfig cfg = source.next();
        const ParamCount params = param_count(cfg);
        const std::int64_t closed =
            12 * cfg.h * cfg.h * cfg.L + 13 * cfg.h * cfg.L + (cfg.v + cfg.s) * cfg.h;
        require(params.breakdown_total() == closed,
                "config " + std::to_string(i) + ": breakdown " +
                    std::to_string(params.breakdown_total()) + " != closed form " +
                    std::to_string(closed));
        require(params.exact == closed, "exact does not use the closed form");
    }
}

// --- criterion 3 -----------------------------------------------------------
// wave_stats matches a brute-force round-robin scheduler for
// m, n in {32..4096 step 32}, both 128x256 orientations, 80/108/144 SMs.
void criterion_wave_oracle() {
    const auto start = std::chrono::steady_clock::now();

    // the worked two-wave example: 109 blocks on 108 SMs
    const WaveStats tail_case = wave_stats({109 * 128, 256, 1, 1, "fp16"}, {128, 256}, 108);
    require(tail_case.total_blocks == 109 && tail_case.wave_count == 2 &&
                tail_case.full_waves == 1 && tail_case.tail_blocks == 1,
            "109 blocks / 108 SMs must schedule as one full wave plus one block");

    const TileSpec tiles[2] = {{128, 256}, {256, 128}};
    const int sm_counts[3] = {80, 108, 144};
    for (std::int64_t m = 32; m <= 4096; m += 32) {
        for (std::int64_t n = 32; n <= 4096; n += 32) {
            for (const TileSpec& tile : tiles) {
                const std::int64_t blocks =
                    oracle::count_blocks(m, n, tile.rows, tile.cols, 1);
                for (int sms : sm_counts) {
                    const auto scheduled = oracle::schedule_blocks(blocks, sms);
                    const WaveStats stats = wave_stats({m, 64, n, 1, "fp16"}, tile, sms);
                    const bool equal = stats.total_blocks == blocks &&
                                       stats.wave_count == scheduled.wave_count &&
                                       stats.full_waves == scheduled.full_waves &&
                                       stats.tail_blocks == scheduled.tail_blocks;
                    require(equal, "mismatch at m=" + std::to_string(m) +
                                       " n=" + std::to_string(n) + " tile=" + to_string(tile) +
                                       " sms=" + std::to_string(sms));
                }
            }
        }
    }
    require(seconds_since(start) < 30.0, "exceeded the 30 s budget");
}

// --- criterion 4 -----------------------------------------------------------
// is_wave_free agrees with "some orientation has no tail" on the same grid.
void criterion_wave_free() {
    for (std::int64_t m = 32; m <= 4096; m += 32) {
        for (std::int64_t n = 32; n <= 4096; n += 32) {
            const std::int64_t fwd = oracle::count_blocks(m, n, 128, 256, 1);
            const std::int64_t swp = oracle::count_blocks(m, n, 256, 128, 1);
            for (int sms : {80, 108, 144}) {
                const bool oracle_free =
                    oracle::schedule_blocks(fwd, sms).tail_blocks == 0 ||
                    oracle::schedule_blocks(swp, sms).tail_blocks == 0;
                require(is_wave_free(m, n, {128, 256}, sms) == oracle_free,
                        "disagreement at m=" + std::to_string(m) + " n=" + std::to_string(n) +
                            " sms=" + std::to_string(sms));
                require(is_wave_free(m, n, {256, 128}, sms) == oracle_free,
                        "orientation asymmetry at m=" + std::to_string(m) +
                            " n=" + std::to_string(n));
            }
        }
    }
}

// --- criterion 5 -----------------------------------------------------------
void criterion_lint_fidelity() {
    const RuleReport report = lint(gpt3_2p7b(), kA100);
    const Diagnostic* r3 = report.first_for("R3");
    require(r3 != nullptr, "R3 must fire for h=2560, a=32");
    require(r3->severity == Severity::Warn, "R3 must be a warning");
    require(r3->observed_value == 80, "R3 must observe h/a = 80");
    require(r3->pow2_divisor == 16, "R3 must report divisor 16");
    require(!r3->suggestions.empty() && r3->suggestions[0] == 40,
            "R3's suggestion list must begin with a = 40");

    TransformerConfig fixed = gpt3_2p7b();
    fixed.a = 40;
    require(lint(fixed, kA100).first_for("R3") == nullptr, "R3 must pass at a = 40");

    TransformerConfig unpadded = gpt3_2p7b();
    unpadded.v = 50257;
    const RuleReport vocab_report = lint(unpadded, kA100);
    const Diagnostic* r1 = vocab_report.first_for("R1");
    require(r1 != nullptr, "R1 must fire for v = 50257");
    require(!r1->suggestions.empty() && r1->suggestions[0] == 50304,
            "R1 must suggest padding to 50304");
}

// --- criterion 6 -----------------------------------------------------------
void criterion_swiglu_search() {
    TransformerConfig context;
    context.h = 4096;
    context.b = 4;
    context.s = 2048;
    const auto results = swiglu_dff_search(4096, 8.0 / 3.0, 512, kA100, context);
    require(!results.empty(), "search returned nothing");
    bool found = false;
    for (const DffCandidate& cand : results) {
        if (cand.pow2_divisor < 64) break; // end of the top-ranked alignment group
        if (cand.d_ff == 11008) {
            found = true;
            break;
        }
    }
    require(found, "11008 must sit inside the divisor>=64 group at h=4096");

    require(largest_pow2_divisor(28672) >= 64, "28672 must carry a 64-element factor");
    TransformerConfig wide = context;
    wide.h = 8192;
    const auto exact = swiglu_dff_search(8192, 3.5, 0, kA100, wide);
    require(exact.size() == 1 && exact[0].d_ff == 28672 && exact[0].pow2_divisor >= 64,
            "d_ff = 28672 at h = 8192 must pass alignment");
}

// --- criterion 7 -----------------------------------------------------------
void criterion_roofline_sanity() {
    oracle::CanonicalConfigSource source(7);
    const GpuSpec gpus[3] = {*find_gpu("V100"), kA100, *find_gpu("H100")};
    for (int i = 0; i < 100; ++i) {
        const TransformerConfig cfg = source.next();
        const LayerDecomposition dec = decompose(cfg);
        for (const GpuSpec& gpu : gpus) {
            const double peak = gpu.peak_for("fp16");
            for (const LayerEntry* entry : dec.gemm_entries(true)) {
                const auto est = estimate_throughput(*entry->gemm, gpu);
                require(est.tflops <= peak, "predicted " + std::to_string(est.tflops) +
                                                " TFLOP/s exceeds peak on " + gpu.name);
            }
        }
    }

    // exact-key calibration returns stored values bit-exactly
    const auto plan = emit_bench_plan(gpt3_2p7b(), kA100);
    CalibrationTable table;
    double synthetic = 17.0;
    for (const PlanRow& row : plan) {
        table.insert({row.gpu, row.dtype, row.batch, row.m, row.k, row.n, synthetic, 1});
        synthetic += 0.5;
    }
    synthetic = 17.0;
    for (const PlanRow& row : plan) {
        const GemmShape shape{row.m, row.k, row.n, row.batch, row.dtype};
        const auto est = estimate_throughput(shape, kA100, &table);
        require(est.calibrated && est.tflops == synthetic,
                "calibrated lookup must return the stored value bit-exactly");
        synthetic += 0.5;
    }

    // emit -> fill -> ingest round-trip
    std::ostringstream csv;
    csv << "gpu,dtype,batch,m,k,n,tflops,repeats\n";
    synthetic = 17.0;
    for (const PlanRow& row : plan) {
        csv << row.gpu << "," << row.dtype << "," << row.batch << "," << row.m << "," << row.k
            << "," << row.n << "," << synthetic << ",1\n";
        synthetic += 0.5;
    }
    std::istringstream in(csv.str());
    const IngestResult ingested = ingest_measurements_text(in, "synthetic");
    require(ingested.rows_loaded == plan.size() && ingested.rows_skipped == 0,
            "plan rows must all ingest");
    synthetic = 17.0;
    for (const PlanRow& row : plan) {
        const GemmShape shape{row.m, row.k, row.n, row.batch, row.dtype};
        require(ingested.table.lookup(row.gpu, shape) == synthetic,
                "ingested value must round-trip exactly");
        synthetic += 0.5;
    }
}

// --- criterion 8 -----------------------------------------------------------
// Applying a suggestion never raises its own rule's severity.
void criterion_suggestion_consistency() {
    oracle::CanonicalConfigSource source(8);
    int applied = 0;
    for (int i = 0; i < 100; ++i) {
        const TransformerConfig cfg = source.next();
        const RuleReport report = lint(cfg, kA100);
        for (const Diagnostic& d : report.diagnostics) {
            for (std::int64_t value : d.suggestions) {
                const RuleReport after = lint(apply_suggestion(cfg, d, value), kA100);
                for (const Diagnostic& later : after.diagnostics) {
                    require(later.rule_id != d.rule_id ||
                                static_cast<int>(later.severity) <
                                    static_cast<int>(d.severity),
                            "rule " + d.rule_id + " did not improve after applying " +
                                std::to_string(value));
                }
                ++applied;
            }
        }
    }
    require(applied > 0, "the family must exercise at least one suggestion");
}

// --- criterion 9 -----------------------------------------------------------
void criterion_alignment_thresholds() {
    require(alignment_elements(kA100, require_dtype("fp16")) == 64,
            "A100/fp16 must require 64 elements");
    require(alignment_elements(*find_gpu("V100"), require_dtype("fp16")) == 8,
            "V100/fp16 must require 8 elements");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
        {"criterion 1: decomposed FLOPs match 24bsh^2 + 4bs^2h exactly",
         criterion_flop_identity},
        {"criterion 2: parameter breakdown matches 12h^2L + 13hL + (v+s)h exactly",
         criterion_param_formula},
        {"criterion 3: wave statistics match the scheduler oracle", criterion_wave_oracle},
        {"criterion 4: wave-free test matches the oracle over both orientations",
         criterion_wave_free},
        {"criterion 5: lint reproduces the 2560/32 head-dimension findings",
         criterion_lint_fidelity},
        {"criterion 6: swiglu search ranks 11008 and accepts 28672", criterion_swiglu_search},
        {"criterion 7: roofline stays under peak; calibration is bit-exact",
         criterion_roofline_sanity},
        {"criterion 8: suggestions never worsen their own rule",
         criterion_suggestion_consistency},
        {"criterion 9: tensor-core thresholds are 64 (A100) and 8 (V100) elements",
         criterion_alignment_thresholds},
    };

    int failures = 0;
    for (const auto& [name, run] : criteria) {
        try {
            run();
            std::printf("PASS  %s\n", name.c_str());
        } catch (const std::exception& error) {
            ++failures;
            std::printf("FAIL  %s: %s\n", name.c_str(), error.what());
        }
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
