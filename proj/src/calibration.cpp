// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include "gemmlint/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "format_util.hpp"
#include "kv_reader.hpp"

namespace gemmlint {

namespace {

constexpr const char* kMeasurementHeader = "gpu,dtype,batch,m,k,n,tflops,repeats";
constexpr const char* kPlanHeader = "gpu,dtype,batch,m,k,n";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(detail::trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

} // namespace

bool CalibrationTable::Key::operator<(const Key& o) const {
    return std::tie(gpu, dtype, batch, m, k, n) <
           std::tie(o.gpu, o.dtype, o.batch, o.m, o.k, o.n);
}

CalibrationTable::CalibrationTable(InterpolationPolicy policy) : policy_(policy) {}

void CalibrationTable::insert(const MeasurementRecord& record) {
    if (record.measured_tflops <= 0.0) {
        throw std::invalid_argument("measured_tflops must be positive");
    }
    if (record.batch < 1 || record.m < 1 || record.k < 1 || record.n < 1) {
        throw std::invalid_argument("measurement shape fields must be >= 1");
    }
    const Key key{record.gpu_name, record.dtype, record.batch, record.m, record.k, record.n};
    auto it = records_.find(key);
    if (it == records_.end() || record.repeats >= it->second.repeats) {
        records_[key] = record; // higher repeats wins; ties go to the latest row
    }
}

std::optional<MeasurementRecord> CalibrationTable::exact(std::string_view gpu_name,
                                                         const GemmShape& shape) const {
    const Key key{std::string(gpu_name), shape.dtype, shape.batch, shape.m, shape.k, shape.n};
    auto it = records_.find(key);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> CalibrationTable::lookup(std::string_view gpu_name,
                                               const GemmShape& shape) const {
    if (auto hit = exact(gpu_name, shape)) return hit->measured_tflops;
    if (policy_ == InterpolationPolicy::ExactOnly) return std::nullopt;

    // Nearest stored shape in log space, same gpu and dtype only. The
    // returned value is always one that was actually measured.
    const MeasurementRecord* best = nullptr;
    double best_distance = 0.0;
    for (const auto& [key, record] : records_) {
        if (key.gpu != gpu_name || key.dtype != shape.dtype) continue;
        const double distance =
            std::fabs(std::log(static_cast<double>(key.m)) -
                      std::log(static_cast<double>(shape.m))) +
            std::fabs(std::log(static_cast<double>(key.k)) -
                      std::log(static_cast<double>(shape.k))) +
            std::fabs(std::log(static_cast<double>(key.n)) -
                      std::log(static_cast<double>(shape.n))) +
            std::fabs(std::log(static_cast<double>(key.batch)) -
                      std::log(static_cast<double>(shape.batch)));
        if (!best || distance < best_distance) { // map order breaks ties deterministically
            best = &record;
            best_distance = distance;
        }
    }
    if (!best) return std::nullopt;
    return best->measured_tflops;
}

std::vector<MeasurementRecord> CalibrationTable::records() const {
    std::vector<MeasurementRecord> out;
    out.reserve(records_.size());
    for (const auto& [key, record] : records_) out.push_back(record);
    return out;
}

namespace {

struct PlanKey {
    std::string gpu, dtype;
    std::int64_t batch, m, k, n;
    bool operator<(const PlanKey& o) const {
        return std::tie(gpu, dtype, batch, m, k, n) <
               std::tie(o.gpu, o.dtype, o.batch, o.m, o.k, o.n);
    }
};

void append_config_rows(const TransformerConfig& cfg, const GpuSpec& gpu,
                        const std::vector<GemmRole>& roles, std::vector<PlanRow>& rows,
                        std::set<PlanKey>& seen) {
    const LayerDecomposition dec = decompose(cfg);
    for (const LayerEntry* entry : dec.gemm_entries(true)) {
        if (!roles.empty() &&
            std::find(roles.begin(), roles.end(), *entry->role) == roles.end()) {
            continue;
        }
        const GemmShape& g = *entry->gemm;
        const PlanKey key{gpu.name, g.dtype, g.batch, g.m, g.k, g.n};
        if (!seen.insert(key).second) continue;
        rows.push_back({gpu.name, g.dtype, g.batch, g.m, g.k, g.n});
    }
}

TransformerConfig at_sweep_point(const TransformerConfig& base, const SweepSpec& sweep,
                                 std::int64_t x) {
    TransformerConfig cfg = base;
    if (sweep.field == "h") {
        cfg.h = x;
        if (sweep.fixed_head_dim) {
            if (x % *sweep.fixed_head_dim != 0) {
                throw std::invalid_argument("sweep point h=" + std::to_string(x) +
                                            " is not divisible by the fixed head dimension " +
                                            std::to_string(*sweep.fixed_head_dim));
            }
            cfg.a = x / *sweep.fixed_head_dim;
        }
    } else if (sweep.field == "a") {
        cfg.a = x;
    } else if (sweep.field == "b") {
        cfg.b = x;
    } else if (sweep.field == "s") {
        cfg.s = x;
    } else if (sweep.field == "t") {
        cfg.t = x;
    } else if (sweep.field == "v") {
        cfg.v = x;
    } else if (sweep.field == "d_ff") {
        cfg.d_ff = x;
    } else {
        throw std::invalid_argument("unknown sweep field '" + sweep.field +
                                    "' (expected h, a, b, s, t, v, or d_ff)");
    }
    return cfg;
}

void check_sweep(const SweepSpec& sweep) {
    if (sweep.step < 1) throw std::invalid_argument("sweep step must be >= 1");
}

} // namespace

std::vector<PlanRow> emit_bench_plan(const TransformerConfig& cfg, const GpuSpec& gpu) {
    std::vector<PlanRow> rows;
    std::set<PlanKey> seen;
    append_config_rows(cfg, gpu, {}, rows, seen);
    return rows;
}

std::vector<PlanRow> emit_bench_plan(const TransformerConfig& base, const SweepSpec& sweep,
                                     const GpuSpec& gpu) {
    check_sweep(sweep);
    std::vector<PlanRow> rows;
    std::set<PlanKey> seen;
    for (std::int64_t x = sweep.lo; x <= sweep.hi; x += sweep.step) {
        append_config_rows(at_sweep_point(base, sweep, x), gpu, sweep.roles, rows, seen);
    }
    return rows;
}

void write_plan_csv(const std::vector<PlanRow>& rows, std::ostream& out) {
    out << kPlanHeader << "\n";
    for (const PlanRow& row : rows) {
        out << row.gpu << "," << row.dtype << "," << row.batch << "," << row.m << "," << row.k
            << "," << row.n << "\n";
    }
    if (!out) throw std::runtime_error("plan write failed");
}

void write_plan_csv(const std::vector<PlanRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_plan_csv(rows, out);
}

IngestResult ingest_measurements_text(std::istream& in, const std::string& source_name,
                                      InterpolationPolicy policy) {
    IngestResult result{CalibrationTable(policy), 0, 0, {}};

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(source_name + ": empty file, expected header '" +
                         kMeasurementHeader + "'");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line) != kMeasurementHeader) {
        throw ParseError(source_name + ":1: bad header '" + line + "', expected '" +
                         kMeasurementHeader + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;

        auto skip = [&](const std::string& why) {
            ++result.rows_skipped;
            result.messages.push_back("row " + std::to_string(line_no) + " skipped: " + why);
        };

        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 8) {
            skip("expected 8 columns, got " + std::to_string(fields.size()));
            continue;
        }
        try {
            MeasurementRecord record;
            record.gpu_name = fields[0];
            record.dtype = fields[1];
            const std::string ctx = source_name + ":" + std::to_string(line_no);
            record.batch = detail::parse_int(fields[2], ctx + " batch");
            record.m = detail::parse_int(fields[3], ctx + " m");
            record.k = detail::parse_int(fields[4], ctx + " k");
            record.n = detail::parse_int(fields[5], ctx + " n");
            record.measured_tflops = detail::parse_real(fields[6], ctx + " tflops");
            record.repeats = detail::parse_int(fields[7], ctx + " repeats");
            if (record.gpu_name.empty()) {
                skip("empty gpu name");
                continue;
            }
            if (record.measured_tflops <= 0.0) {
                skip("non-positive tflops " + fields[6]);
                continue;
            }
            if (record.batch < 1 || record.m < 1 || record.k < 1 || record.n < 1) {
                skip("shape fields must be >= 1");
                continue;
            }
            result.table.insert(record);
            ++result.rows_loaded;
        } catch (const ParseError& error) {
            skip(error.what());
        }
    }
    return result;
}

IngestResult ingest_measurements(const std::string& path, InterpolationPolicy policy) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    return ingest_measurements_text(in, path, policy);
}

void write_measurements_csv(const std::vector<MeasurementRecord>& records, std::ostream& out) {
    out << kMeasurementHeader << "\n";
    for (const MeasurementRecord& r : records) {
        out << r.gpu_name << "," << r.dtype << "," << r.batch << "," << r.m << "," << r.k << ","
            << r.n << "," << detail::format_double(r.measured_tflops) << "," << r.repeats
            << "\n";
    }
    if (!out) throw std::runtime_error("measurement write failed");
}

std::vector<SweepRow> run_sweep(const TransformerConfig& base, const SweepSpec& sweep,
                                const GpuSpec& gpu, const CalibrationTable* calibration) {
    check_sweep(sweep);
    std::vector<SweepRow> out;
    for (std::int64_t x = sweep.lo; x <= sweep.hi; x += sweep.step) {
        const TransformerConfig cfg = at_sweep_point(base, sweep, x);
        const LayerDecomposition dec = decompose(cfg);
        for (const LayerEntry* entry : dec.gemm_entries(true)) {
            if (!sweep.roles.empty() &&
                std::find(sweep.roles.begin(), sweep.roles.end(), *entry->role) ==
                    sweep.roles.end()) {
                continue;
            }
            out.push_back({x, *entry->role, analyze_gemm(*entry->gemm, gpu, calibration)});
        }
    }
    return out;
}

void export_sweep(const std::string& x_name, const std::vector<SweepRow>& rows,
                  std::ostream& out) {
    if (rows.empty()) throw std::invalid_argument("export_sweep requires non-empty results");
    out << x_name << ",role,predicted_tflops,predicted_latency_us,wave_efficiency,aligned\n";
    for (const SweepRow& row : rows) {
        out << row.x << "," << role_name(row.role) << ","
            << detail::format_double(row.analysis.predicted_tflops) << ","
            << detail::format_double(row.analysis.predicted_latency_us) << ","
            << detail::format_double(row.analysis.waves.wave_efficiency) << ","
            << (row.analysis.alignment.all_aligned() ? "true" : "false") << "\n";
    }
    if (!out) throw std::runtime_error("sweep write failed");
}

void export_sweep(const std::string& x_name, const std::vector<SweepRow>& rows,
                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    export_sweep(x_name, rows, out);
}

} // namespace gemmlint
