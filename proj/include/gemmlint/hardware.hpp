// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// GPU and numeric-format descriptors plus the built-in hardware catalog.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gemmlint/errors.hpp"

namespace gemmlint {

/// An element format as it matters for GEMM analysis: its name and width.
struct DTypeSpec {
    std::string name;
    int bytes_per_element = 0; // one of 1, 2, 4, 8

    void validate() const; // throws std::invalid_argument naming the field
};

/// Output-matrix tile processed by one thread block, rows x cols.
struct TileSpec {
    std::int64_t rows = 0; // t1
    std::int64_t cols = 0; // t2

    bool operator==(const TileSpec&) const = default;
    TileSpec transposed() const { return {cols, rows}; }
};

std::string to_string(const TileSpec& tile);      // "128x256"
TileSpec parse_tile(std::string_view text);       // throws ParseError

/// Hardware descriptor for one GPU model. Peak rates and bandwidth are
/// editable data (load_gpu_spec / save_gpu_spec), not constants; the
/// built-in entries ship datasheet defaults only.
struct GpuSpec {
    std::string name;
    int sm_count = 0;                // streaming multiprocessors
    int tc_alignment_bytes = 0;      // tensor-core dimension alignment, power of two
    std::vector<TileSpec> tile_candidates;
    std::map<std::string, double> peak_matmul_tflops; // dtype name -> TFLOP/s
    double mem_bandwidth_gbps = 0.0;

    // Throughput multiplier floor applied to a GEMM whose dimensions miss
    // tensor-core alignment. Heuristic, overridable in the spec file.
    double alignment_penalty_floor = 0.5;

    void validate() const;                      // throws std::invalid_argument
    double peak_for(std::string_view dtype) const; // throws std::invalid_argument if absent
};

const std::vector<DTypeSpec>& builtin_dtypes();
std::optional<DTypeSpec> find_dtype(std::string_view name);
DTypeSpec require_dtype(std::string_view name); // throws std::invalid_argument

/// Tile sizes a GEMM library may pick from, largest first. Only 128x256
/// (either orientation) runs at full efficiency on current kernels; the
/// smaller entries model fallback choices.
std::vector<TileSpec> default_tile_candidates();

/// Built-in entries: V100 (80 SMs, 16-byte alignment), A100 (108 SMs,
/// 128 bytes), H100 (144 SMs, 128 bytes assumed), plus an MI250X stub
/// whose peak-rate table is empty and must be supplied by the user.
const std::vector<GpuSpec>& builtin_gpus();
std::optional<GpuSpec> find_gpu(std::string_view name);

/// Alignment requirement converted from bytes to elements of the given
/// dtype, floor-clamped to 1. A100/fp16 -> 64, V100/fp16 -> 8.
std::int64_t alignment_elements(const GpuSpec& gpu, const DTypeSpec& dtype);

/// Key-value spec file IO. load validates every invariant and reports
/// parse errors with file:line and invariant violations naming the field.
GpuSpec load_gpu_spec(const std::string& path);
void save_gpu_spec(const GpuSpec& gpu, const std::string& path);

/// Resolves --gpu arguments: built-in name, then a file path, then
/// <name>.gpu under the directory named by the GEMMLINT_GPU_DIR
/// environment variable.
GpuSpec resolve_gpu(const std::string& name_or_path);

} // namespace gemmlint
