// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// Benchmark-plan emission, measured-throughput ingestion, and sweep
// export. CSV on both sides so the measuring script on a GPU host stays
// trivial. Column orders are normative:
//   plan:        gpu,dtype,batch,m,k,n
//   measurement: gpu,dtype,batch,m,k,n,tflops,repeats
//   sweep:       <x>,role,predicted_tflops,predicted_latency_us,wave_efficiency,aligned

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gemmlint/transformer.hpp"

namespace gemmlint {

struct MeasurementRecord {
    std::string gpu_name;
    std::string dtype;
    std::int64_t batch = 1;
    std::int64_t m = 0;
    std::int64_t k = 0;
    std::int64_t n = 0;
    double measured_tflops = 0.0;
    std::int64_t repeats = 1;
};

enum class InterpolationPolicy { ExactOnly, NearestLogShape };

/// Measured GEMM throughputs keyed by (gpu, dtype, batch, m, k, n).
/// Exact-key lookups return the stored value verbatim. NearestLogShape
/// falls back to the stored record minimizing sum |log d_i - log d_j|
/// over m, k, n, batch among records for the same gpu and dtype; it
/// never fabricates a value that was not measured. Immutable once
/// ingestion finishes; concurrent readers are safe.
class CalibrationTable {
public:
    explicit CalibrationTable(InterpolationPolicy policy = InterpolationPolicy::ExactOnly);

    /// Duplicate keys resolve higher-repeats-wins, ties last-wins.
    void insert(const MeasurementRecord& record);

    std::optional<double> lookup(std::string_view gpu_name, const GemmShape& shape) const;
    std::optional<MeasurementRecord> exact(std::string_view gpu_name, const GemmShape& shape) const;

    std::size_t size() const { return records_.size(); }
    InterpolationPolicy policy() const { return policy_; }
    std::vector<MeasurementRecord> records() const;

private:
    struct Key {
        std::string gpu;
        std::string dtype;
        std::int64_t batch, m, k, n;
        bool operator<(const Key& o) const;
    };
    std::map<Key, MeasurementRecord> records_;
    InterpolationPolicy policy_ = InterpolationPolicy::ExactOnly;
};

struct PlanRow {
    std::string gpu;
    std::string dtype;
    std::int64_t batch = 1;
    std::int64_t m = 0;
    std::int64_t k = 0;
    std::int64_t n = 0;
};

/// Every distinct GEMM shape the configuration executes (logit included,
/// fused flash entries excluded). No two rows share a key.
std::vector<PlanRow> emit_bench_plan(const TransformerConfig& cfg, const GpuSpec& gpu);

/// One-dimensional sweep of a config field.
struct SweepSpec {
    std::string field; // "h", "a", "b", "s", "t", "v", "d_ff"
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::int64_t step = 1;
    std::vector<GemmRole> roles;               // empty -> all GEMM roles
    std::optional<std::int64_t> fixed_head_dim; // keep h/a constant while h sweeps
};

std::vector<PlanRow> emit_bench_plan(const TransformerConfig& base, const SweepSpec& sweep,
                                     const GpuSpec& gpu);

void write_plan_csv(const std::vector<PlanRow>& rows, std::ostream& out);
void write_plan_csv(const std::vector<PlanRow>& rows, const std::string& path);

struct IngestResult {
    CalibrationTable table;
    std::size_t rows_loaded = 0;
    std::size_t rows_skipped = 0;
    std::vector<std::string> messages; // one per skipped row
};

/// Parses a measurement CSV. A bad header throws ParseError; bad rows
/// are skipped, counted, and reported in messages ("row N skipped: ...").
IngestResult ingest_measurements(const std::string& path,
                                 InterpolationPolicy policy = InterpolationPolicy::ExactOnly);
IngestResult ingest_measurements_text(std::istream& in, const std::string& source_name,
                                      InterpolationPolicy policy = InterpolationPolicy::ExactOnly);

void write_measurements_csv(const std::vector<MeasurementRecord>& records, std::ostream& out);

struct SweepRow {
    std::int64_t x = 0;
    GemmRole role = GemmRole::QkvTransform;
    GemmAnalysis analysis;
};

/// Analyzes every sweep point; decomposition failures propagate (a sweep
/// that crosses a divisibility boundary is a caller error).
std::vector<SweepRow> run_sweep(const TransformerConfig& base, const SweepSpec& sweep,
                                const GpuSpec& gpu, const CalibrationTable* calibration = nullptr);

/// Floats are written in shortest round-trip form so export / re-read
/// is the identity.
void export_sweep(const std::string& x_name, const std::vector<SweepRow>& rows, std::ostream& out);
void export_sweep(const std::string& x_name, const std::vector<SweepRow>& rows,
                  const std::string& path);

} // namespace gemmlint
