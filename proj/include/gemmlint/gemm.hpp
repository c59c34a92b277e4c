// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// GEMM/BMM arithmetic: FLOP and byte accounting, tile-grid decomposition,
// tile/wave quantization statistics, alignment checks, and roofline
// throughput estimates. All functions are pure.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "gemmlint/hardware.hpp"

namespace gemmlint {

class CalibrationTable; // calibration.hpp

/// One (possibly batched) matrix-multiply problem:
/// C_i = alpha * A_i B_i + beta * C_i for i in 1..batch, with A_i m x k,
/// B_i k x n. batch == 1 is a plain GEMM. alpha/beta affect byte traffic
/// only (beta != 0 additionally reads C).
struct GemmShape {
    std::int64_t m = 1;
    std::int64_t k = 1;
    std::int64_t n = 1;
    std::int64_t batch = 1;
    std::string dtype = "fp16";
    double alpha = 1.0;
    double beta = 0.0;
};

/// 2 * batch * m * k * n. Throws std::overflow_error rather than wrapping.
std::int64_t flops(const GemmShape& g);

/// batch * (m*k + k*n + m*n) elements, plus batch * m*n extra reads when
/// beta != 0, times the dtype width. Throws on unknown dtype or overflow.
std::int64_t bytes_moved(const GemmShape& g);

struct TileGrid {
    std::int64_t rows = 0; // ceil(m / t1)
    std::int64_t cols = 0; // ceil(n / t2)
};
TileGrid tile_grid(std::int64_t m, std::int64_t n, const TileSpec& tile);

/// Fraction of launched tile area that computes no useful output:
/// 1 - m*n / (grid_rows*t1 * grid_cols*t2). Zero when both divide evenly.
double tile_waste(std::int64_t m, std::int64_t n, const TileSpec& tile);

/// How the thread blocks of one kernel launch fill the GPU, wave by wave.
struct WaveStats {
    TileSpec tile;
    std::int64_t grid_rows = 0;
    std::int64_t grid_cols = 0;
    std::int64_t total_blocks = 0; // batch * grid_rows * grid_cols
    std::int64_t full_waves = 0;
    std::int64_t tail_blocks = 0;  // 0 <= tail < sm_count
    std::int64_t wave_count = 0;   // ceil(total / sm_count)
    double wave_efficiency = 1.0;  // total / (wave_count * sm_count)
};
WaveStats wave_stats(const GemmShape& g, const TileSpec& tile, int sm_count);

/// True iff either tile orientation yields a block count that is an exact
/// multiple of sm_count, i.e. ceil(m/t1)*ceil(n/t2) == 0 (mod #SMs) or
/// ceil(m/t2)*ceil(n/t1) == 0 (mod #SMs).
bool is_wave_free(std::int64_t m, std::int64_t n, const TileSpec& tile, int sm_count);

struct AlignmentEntry {
    std::string dim;               // "m", "k", "n"
    std::int64_t value = 0;
    std::int64_t pow2_divisor = 0; // largest power of two dividing value
    std::int64_t required = 0;     // alignment_elements(gpu, dtype)
    bool aligned = false;          // value % required == 0
};

struct AlignmentReport {
    std::array<AlignmentEntry, 3> dims; // m, k, n

    bool all_aligned() const;
    /// Entry with the smallest pow2_divisor / required ratio.
    const AlignmentEntry& worst() const;
};
AlignmentReport alignment_report(const GemmShape& g, const GpuSpec& gpu);

/// Deterministic proxy for the library's tile choice: minimizes
/// wave_count * t1 * t2 * k (per-wave cost proportional to tile area
/// times depth). Ties prefer larger tiles, then candidate order.
TileSpec select_tile(const GemmShape& g, const GpuSpec& gpu);

struct ThroughputEstimate {
    double tflops = 0.0;
    double latency_us = 0.0;
    bool calibrated = false; // true when a measurement supplied the value
};

/// Predicted throughput for one kernel. A calibration hit (exact key, or
/// nearest-in-log-shape under that policy) is returned verbatim.
/// Otherwise: roofline min(peak, intensity * bandwidth) scaled by wave
/// efficiency, by (1 - tile_waste), and by an alignment penalty of
/// max(floor, worst divisor/required) when any dimension is unaligned.
ThroughputEstimate estimate_throughput(const GemmShape& g, const GpuSpec& gpu,
                                       const CalibrationTable* calibration = nullptr);

/// Full per-kernel record, the unit of report and sweep output.
struct GemmAnalysis {
    GemmShape shape;
    std::int64_t flop_count = 0;
    std::int64_t byte_count = 0;
    double arithmetic_intensity = 0.0; // FLOPs per byte
    AlignmentReport alignment;
    TileSpec chosen_tile;
    WaveStats waves;
    double tile_waste_fraction = 0.0;
    double predicted_tflops = 0.0;
    double predicted_latency_us = 0.0;
    bool calibrated = false;
};
GemmAnalysis analyze_gemm(const GemmShape& g, const GpuSpec& gpu,
                          const CalibrationTable* calibration = nullptr);

/// Largest power of two dividing v (v >= 1).
std::int64_t largest_pow2_divisor(std::int64_t v);

std::int64_t ceil_div(std::int64_t a, std::int64_t b);

} // namespace gemmlint
