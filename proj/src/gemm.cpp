// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include "gemmlint/gemm.hpp"

#include <algorithm>
#include <stdexcept>

#include "gemmlint/calibration.hpp"
#include "checked_math.hpp"

namespace gemmlint {

namespace {

using detail::checked_add;
using detail::checked_mul;

void check_shape(const GemmShape& g) {
    if (g.m < 1 || g.k < 1 || g.n < 1 || g.batch < 1) {
        throw std::invalid_argument("GEMM dimensions must be >= 1, got m=" + std::to_string(g.m) +
                                    " k=" + std::to_string(g.k) + " n=" + std::to_string(g.n) +
                                    " batch=" + std::to_string(g.batch));
    }
}

void check_tile(const TileSpec& tile) {
    if (tile.rows < 1 || tile.cols < 1) {
        throw std::invalid_argument("tile dimensions must be >= 1, got " + to_string(tile));
    }
}

double latency_us_for(std::int64_t flop_count, double tflops) {
    return static_cast<double>(flop_count) / (tflops * 1e6);
}

} // namespace

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a / b + (a % b != 0 ? 1 : 0); }

std::int64_t largest_pow2_divisor(std::int64_t v) {
    if (v < 1) throw std::invalid_argument("largest_pow2_divisor requires v >= 1");
    return v & -v;
}

std::int64_t flops(const GemmShape& g) {
    check_shape(g);
    std::int64_t out = checked_mul(2, g.batch, "flops");
    out = checked_mul(out, g.m, "flops");
    out = checked_mul(out, g.k, "flops");
    out = checked_mul(out, g.n, "flops");
    return out;
}

std::int64_t bytes_moved(const GemmShape& g) {
    check_shape(g);
    const DTypeSpec dtype = require_dtype(g.dtype);
    std::int64_t elems = checked_add(checked_mul(g.m, g.k, "bytes_moved"),
                                     checked_mul(g.k, g.n, "bytes_moved"), "bytes_moved");
    elems = checked_add(elems, checked_mul(g.m, g.n, "bytes_moved"), "bytes_moved");
    if (g.beta != 0.0) {
        // beta != 0 additionally reads the existing C
        elems = checked_add(elems, checked_mul(g.m, g.n, "bytes_moved"), "bytes_moved");
    }
    elems = checked_mul(elems, g.batch, "bytes_moved");
    return checked_mul(elems, dtype.bytes_per_element, "bytes_moved");
}

TileGrid tile_grid(std::int64_t m, std::int64_t n, const TileSpec& tile) {
    check_tile(tile);
    return {ceil_div(m, tile.rows), ceil_div(n, tile.cols)};
}

double tile_waste(std::int64_t m, std::int64_t n, const TileSpec& tile) {
    const TileGrid grid = tile_grid(m, n, tile);
    const double covered = static_cast<double>(grid.rows) * static_cast<double>(tile.rows) *
                           static_cast<double>(grid.cols) * static_cast<double>(tile.cols);
    return 1.0 - static_cast<double>(m) * static_cast<double>(n) / covered;
}

WaveStats wave_stats(const GemmShape& g, const TileSpec& tile, int sm_count) {
    check_shape(g);
    if (sm_count < 1) throw std::invalid_argument("sm_count must be >= 1");
    const TileGrid grid = tile_grid(g.m, g.n, tile);

    WaveStats stats;
    stats.tile = tile;
    stats.grid_rows = grid.rows;
    stats.grid_cols = grid.cols;
    stats.total_blocks =
        checked_mul(checked_mul(grid.rows, grid.cols, "wave_stats"), g.batch, "wave_stats");
    stats.full_waves = stats.total_blocks / sm_count;
    stats.tail_blocks = stats.total_blocks % sm_count;
    stats.wave_count = ceil_div(stats.total_blocks, sm_count);
    stats.wave_efficiency = static_cast<double>(stats.total_blocks) /
                            (static_cast<double>(stats.wave_count) * sm_count);
    return stats;
}

bool is_wave_free(std::int64_t m, std::int64_t n, const TileSpec& tile, int sm_count) {
    if (sm_count < 1) throw std::invalid_argument("sm_count must be >= 1");
    check_tile(tile);
    const TileGrid a = tile_grid(m, n, tile);
    const TileGrid b = tile_grid(m, n, tile.transposed());
    const std::int64_t blocks_a = checked_mul(a.rows, a.cols, "is_wave_free");
    const std::int64_t blocks_b = checked_mul(b.rows, b.cols, "is_wave_free");
    return blocks_a % sm_count == 0 || blocks_b % sm_count == 0;
}

bool AlignmentReport::all_aligned() const {
    return dims[0].aligned && dims[1].aligned && dims[2].aligned;
}

const AlignmentEntry& AlignmentReport::worst() const {
    const AlignmentEntry* out = &dims[0];
    auto ratio = [](const AlignmentEntry& e) {
        return static_cast<double>(e.pow2_divisor) / static_cast<double>(e.required);
    };
    for (const AlignmentEntry& e : dims) {
        if (ratio(e) < ratio(*out)) out = &e;
    }
    return *out;
}

AlignmentReport alignment_report(const GemmShape& g, const GpuSpec& gpu) {
    check_shape(g);
    const std::int64_t required = alignment_elements(gpu, require_dtype(g.dtype));
    AlignmentReport report;
    const std::pair<const char*, std::int64_t> values[3] = {{"m", g.m}, {"k", g.k}, {"n", g.n}};
    for (int i = 0; i < 3; ++i) {
        AlignmentEntry& entry = report.dims[i];
        entry.dim = values[i].first;
        entry.value = values[i].second;
        entry.pow2_divisor = largest_pow2_divisor(entry.value);
        entry.required = required;
        entry.aligned = entry.value % required == 0;
    }
    return report;
}

TileSpec select_tile(const GemmShape& g, const GpuSpec& gpu) {
    if (gpu.tile_candidates.empty()) {
        throw std::invalid_argument("gpu '" + gpu.name + "' has no tile candidates");
    }
    const TileSpec* best = nullptr;
    unsigned __int128 best_cost = 0;
    std::int64_t best_area = 0;
    for (const TileSpec& tile : gpu.tile_candidates) {
        const WaveStats stats = wave_stats(g, tile, gpu.sm_count);
        const unsigned __int128 cost = static_cast<unsigned __int128>(stats.wave_count) *
                                       static_cast<unsigned __int128>(tile.rows) *
                                       static_cast<unsigned __int128>(tile.cols) *
                                       static_cast<unsigned __int128>(g.k);
        const std::int64_t area = tile.rows * tile.cols;
        if (!best || cost < best_cost || (cost == best_cost && area > best_area)) {
            best = &tile;
            best_cost = cost;
            best_area = area;
        }
    }
    return *best;
}

ThroughputEstimate estimate_throughput(const GemmShape& g, const GpuSpec& gpu,
                                       const CalibrationTable* calibration) {
    const std::int64_t work = flops(g);

    if (calibration) {
        if (auto measured = calibration->lookup(gpu.name, g)) {
            // Measurements outrank the model, verbatim.
            return {*measured, latency_us_for(work, *measured), true};
        }
    }

    const double peak = gpu.peak_for(g.dtype);
    const double intensity = static_cast<double>(work) / static_cast<double>(bytes_moved(g));
    double tflops = std::min(peak, intensity * gpu.mem_bandwidth_gbps / 1000.0);

    const TileSpec tile = select_tile(g, gpu);
    const WaveStats waves = wave_stats(g, tile, gpu.sm_count);
    tflops *= waves.wave_efficiency;
    tflops *= 1.0 - tile_waste(g.m, g.n, tile);

    const AlignmentReport alignment = alignment_report(g, gpu);
    if (!alignment.all_aligned()) {
        const AlignmentEntry& worst = alignment.worst();
        const double ratio =
            static_cast<double>(worst.pow2_divisor) / static_cast<double>(worst.required);
        tflops *= std::max(gpu.alignment_penalty_floor, ratio);
    }

    return {tflops, latency_us_for(work, tflops), false};
}

GemmAnalysis analyze_gemm(const GemmShape& g, const GpuSpec& gpu,
                          const CalibrationTable* calibration) {
    GemmAnalysis analysis;
    analysis.shape = g;
    analysis.flop_count = flops(g);
    analysis.byte_count = bytes_moved(g);
    analysis.arithmetic_intensity =
        static_cast<double>(analysis.flop_count) / static_cast<double>(analysis.byte_count);
    analysis.alignment = alignment_report(g, gpu);
    analysis.chosen_tile = select_tile(g, gpu);
    analysis.waves = wave_stats(g, analysis.chosen_tile, gpu.sm_count);
    analysis.tile_waste_fraction = tile_waste(g.m, g.n, analysis.chosen_tile);
    const ThroughputEstimate estimate = estimate_throughput(g, gpu, calibration);
    analysis.predicted_tflops = estimate.tflops;
    analysis.predicted_latency_us = estimate.latency_us;
    analysis.calibrated = estimate.calibrated;
    return analysis;
}

} // namespace gemmlint
