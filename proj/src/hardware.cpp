// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include "gemmlint/hardware.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "format_util.hpp"
#include "kv_reader.hpp"

namespace gemmlint {

namespace {

bool is_pow2(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw std::invalid_argument("invalid field '" + field + "': " + why);
}

} // namespace

void DTypeSpec::validate() const {
    if (name.empty()) invalid("name", "must be non-empty");
    if (bytes_per_element != 1 && bytes_per_element != 2 && bytes_per_element != 4 &&
        bytes_per_element != 8) {
        invalid("bytes_per_element", "must be 1, 2, 4 or 8, got " +
                                         std::to_string(bytes_per_element));
    }
}

std::string to_string(const TileSpec& tile) {
    return std::to_string(tile.rows) + "x" + std::to_string(tile.cols);
}

TileSpec parse_tile(std::string_view text) {
    const std::string value = detail::trim(text);
    const std::size_t x = value.find_first_of("xX*");
    if (x == std::string::npos) {
        throw ParseError("tile '" + value + "': expected ROWSxCOLS, e.g. 128x256");
    }
    TileSpec tile;
    tile.rows = detail::parse_int(value.substr(0, x), "tile rows");
    tile.cols = detail::parse_int(value.substr(x + 1), "tile cols");
    if (tile.rows < 1 || tile.cols < 1) {
        throw ParseError("tile '" + value + "': dimensions must be positive");
    }
    return tile;
}

void GpuSpec::validate() const {
    if (name.empty()) invalid("name", "must be non-empty");
    if (sm_count <= 0) invalid("sm_count", "must be positive, got " + std::to_string(sm_count));
    if (!is_pow2(tc_alignment_bytes)) {
        invalid("tc_alignment_bytes",
                "must be a positive power of two, got " + std::to_string(tc_alignment_bytes));
    }
    if (tile_candidates.empty()) invalid("tile_candidates", "must be non-empty");
    for (const TileSpec& tile : tile_candidates) {
        if (!is_pow2(tile.rows) || !is_pow2(tile.cols)) {
            invalid("tile_candidates", "tile " + to_string(tile) + " is not power-of-two sized");
        }
    }
    if (mem_bandwidth_gbps <= 0.0) {
        invalid("mem_bandwidth_gbps", "must be positive");
    }
    for (const auto& [dtype, tflops] : peak_matmul_tflops) {
        if (!find_dtype(dtype)) invalid("peak_tflops." + dtype, "unknown dtype");
        if (tflops <= 0.0) invalid("peak_tflops." + dtype, "must be positive");
    }
    if (alignment_penalty_floor <= 0.0 || alignment_penalty_floor > 1.0) {
        invalid("alignment_penalty_floor", "must be in (0, 1]");
    }
}

double GpuSpec::peak_for(std::string_view dtype) const {
    auto it = peak_matmul_tflops.find(std::string(dtype));
    if (it == peak_matmul_tflops.end()) {
        throw std::invalid_argument("gpu '" + name + "' has no peak matmul rate for dtype '" +
                                    std::string(dtype) +
                                    "' (supply one in the GPU spec file)");
    }
    return it->second;
}

const std::vector<DTypeSpec>& builtin_dtypes() {
    static const std::vector<DTypeSpec> table = {
        {"fp8", 1}, {"int8", 1}, {"fp16", 2}, {"bf16", 2},
        {"tf32", 4}, {"fp32", 4}, {"fp64", 8},
    };
    return table;
}

std::optional<DTypeSpec> find_dtype(std::string_view name) {
    for (const DTypeSpec& d : builtin_dtypes()) {
        if (d.name == name) return d;
    }
    return std::nullopt;
}

DTypeSpec require_dtype(std::string_view name) {
    auto found = find_dtype(name);
    if (!found) throw std::invalid_argument("unknown dtype '" + std::string(name) + "'");
    return *found;
}

std::vector<TileSpec> default_tile_candidates() {
    return {{256, 128}, {128, 256}, {128, 128}, {256, 64},
            {64, 256},  {128, 64},  {64, 128},  {64, 64}};
}

const std::vector<GpuSpec>& builtin_gpus() {
    // Peak rates and bandwidth below are public datasheet defaults, kept
    // as data the user can override through a spec file. The MI250X
    // entry intentionally ships no peak rates: estimates on it fail
    // until the user supplies measured or datasheet numbers.
    static const std::vector<GpuSpec> table = [] {
        std::vector<GpuSpec> gpus;

        GpuSpec v100;
        v100.name = "V100";
        v100.sm_count = 80;
        v100.tc_alignment_bytes = 16;
        v100.tile_candidates = default_tile_candidates();
        v100.peak_matmul_tflops = {{"fp16", 112.0}, {"fp32", 15.7}, {"fp64", 7.8}};
        v100.mem_bandwidth_gbps = 900.0;
        gpus.push_back(std::move(v100));

        GpuSpec a100;
        a100.name = "A100";
        a100.sm_count = 108;
        a100.tc_alignment_bytes = 128;
        a100.tile_candidates = default_tile_candidates();
        a100.peak_matmul_tflops = {{"fp16", 312.0}, {"bf16", 312.0}, {"tf32", 156.0},
                                   {"fp32", 19.5},  {"int8", 624.0}, {"fp64", 19.5}};
        a100.mem_bandwidth_gbps = 1555.0;
        gpus.push_back(std::move(a100));

        GpuSpec h100;
        h100.name = "H100";
        h100.sm_count = 144;
        h100.tc_alignment_bytes = 128; // assumed equal to A100; not vendor-confirmed
        h100.tile_candidates = default_tile_candidates();
        h100.peak_matmul_tflops = {{"fp16", 989.0}, {"bf16", 989.0}, {"tf32", 494.0},
                                   {"fp8", 1979.0}, {"fp32", 67.0},  {"fp64", 67.0}};
        h100.mem_bandwidth_gbps = 3350.0;
        gpus.push_back(std::move(h100));

        GpuSpec mi250x;
        mi250x.name = "MI250X";
        mi250x.sm_count = 110; // compute units per GCD; override to taste
        mi250x.tc_alignment_bytes = 128;
        mi250x.tile_candidates = default_tile_candidates();
        mi250x.mem_bandwidth_gbps = 1638.0; // per GCD
        gpus.push_back(std::move(mi250x));

        for (const GpuSpec& gpu : gpus) gpu.validate();
        return gpus;
    }();
    return table;
}

std::optional<GpuSpec> find_gpu(std::string_view name) {
    for (const GpuSpec& gpu : builtin_gpus()) {
        if (gpu.name == name) return gpu;
    }
    return std::nullopt;
}

std::int64_t alignment_elements(const GpuSpec& gpu, const DTypeSpec& dtype) {
    dtype.validate();
    return std::max<std::int64_t>(1, gpu.tc_alignment_bytes / dtype.bytes_per_element);
}

GpuSpec load_gpu_spec(const std::string& path) {
    const auto kv = detail::KvReader::from_file(path);

    static const std::vector<std::string> known = {
        "name",          "sm_count",       "tc_alignment_bytes", "mem_bandwidth_gbps",
        "tile_candidates", "alignment_penalty_floor",
    };
    for (const auto& [key, entry] : kv.entries()) {
        if (key.rfind("peak_tflops.", 0) == 0) continue;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParseError(path + ":" + std::to_string(entry.second) + ": unknown field '" +
                             key + "'");
        }
    }

    GpuSpec gpu;
    gpu.name = kv.require("name");
    gpu.sm_count = static_cast<int>(kv.require_int("sm_count"));
    gpu.tc_alignment_bytes = static_cast<int>(kv.require_int("tc_alignment_bytes"));
    gpu.mem_bandwidth_gbps = kv.require_real("mem_bandwidth_gbps");
    if (auto floor = kv.get_real("alignment_penalty_floor")) {
        gpu.alignment_penalty_floor = *floor;
    }

    if (auto tiles = kv.get("tile_candidates")) {
        std::stringstream list(*tiles);
        std::string item;
        while (std::getline(list, item, ',')) {
            gpu.tile_candidates.push_back(parse_tile(item));
        }
    } else {
        gpu.tile_candidates = default_tile_candidates();
    }

    for (const auto& [dtype, value] : kv.with_prefix("peak_tflops")) {
        gpu.peak_matmul_tflops[dtype] =
            detail::parse_real(value, path + ": field 'peak_tflops." + dtype + "'");
    }

    gpu.validate();
    return gpu;
}

void save_gpu_spec(const GpuSpec& gpu, const std::string& path) {
    gpu.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "name = " << gpu.name << "\n";
    out << "sm_count = " << gpu.sm_count << "\n";
    out << "tc_alignment_bytes = " << gpu.tc_alignment_bytes << "\n";
    out << "mem_bandwidth_gbps = " << detail::format_double(gpu.mem_bandwidth_gbps) << "\n";
    out << "alignment_penalty_floor = " << detail::format_double(gpu.alignment_penalty_floor)
        << "\n";
    out << "tile_candidates = ";
    for (std::size_t i = 0; i < gpu.tile_candidates.size(); ++i) {
        if (i) out << ", ";
        out << to_string(gpu.tile_candidates[i]);
    }
    out << "\n";
    for (const auto& [dtype, tflops] : gpu.peak_matmul_tflops) {
        out << "peak_tflops." << dtype << " = " << detail::format_double(tflops) << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

GpuSpec resolve_gpu(const std::string& name_or_path) {
    if (auto builtin = find_gpu(name_or_path)) return *builtin;
    if (std::filesystem::exists(name_or_path)) return load_gpu_spec(name_or_path);
    if (const char* dir = std::getenv("GEMMLINT_GPU_DIR")) {
        const std::filesystem::path candidate =
            std::filesystem::path(dir) / (name_or_path + ".gpu");
        if (std::filesystem::exists(candidate)) return load_gpu_spec(candidate.string());
    }
    throw std::invalid_argument("unknown GPU '" + name_or_path +
                                "': not a built-in name, file path, or entry under "
                                "$GEMMLINT_GPU_DIR");
}

} // namespace gemmlint
