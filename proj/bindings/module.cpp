// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the gemmlint core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gemmlint/calibration.hpp"
#include "gemmlint/optimizer.hpp"
#include "gemmlint/rules.hpp"

namespace py = pybind11;
using namespace gemmlint;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Transformer shape / GPU GEMM efficiency analysis";

    // ----- hardware ---------------------------------------------------------
    py::class_<DTypeSpec>(m, "DTypeSpec")
        .def(py::init<>())
        .def_readwrite("name", &DTypeSpec::name)
        .def_readwrite("bytes_per_element", &DTypeSpec::bytes_per_element);

    py::class_<TileSpec>(m, "TileSpec")
        .def(py::init<>())
        .def(py::init([](std::int64_t rows, std::int64_t cols) {
                 return TileSpec{rows, cols};
             }),
             py::arg("rows"), py::arg("cols"))
        .def_readwrite("rows", &TileSpec::rows)
        .def_readwrite("cols", &TileSpec::cols)
        .def("__eq__", [](const TileSpec& a, const TileSpec& b) { return a == b; })
        .def("__repr__", [](const TileSpec& t) { return to_string(t); });

    py::class_<GpuSpec>(m, "GpuSpec")
        .def(py::init<>())
        .def_readwrite("name", &GpuSpec::name)
        .def_readwrite("sm_count", &GpuSpec::sm_count)
        .def_readwrite("tc_alignment_bytes", &GpuSpec::tc_alignment_bytes)
        .def_readwrite("tile_candidates", &GpuSpec::tile_candidates)
        .def_readwrite("peak_matmul_tflops", &GpuSpec::peak_matmul_tflops)
        .def_readwrite("mem_bandwidth_gbps", &GpuSpec::mem_bandwidth_gbps)
        .def_readwrite("alignment_penalty_floor", &GpuSpec::alignment_penalty_floor)
        .def("validate", &GpuSpec::validate)
        .def("peak_for", &GpuSpec::peak_for)
        .def("__repr__", [](const GpuSpec& g) { return "<GpuSpec " + g.name + ">"; });

    m.def("builtin_dtypes", &builtin_dtypes);
    m.def("find_dtype", &find_dtype);
    m.def("require_dtype", &require_dtype);
    m.def("default_tile_candidates", &default_tile_candidates);
    m.def("parse_tile", &parse_tile);
    m.def("builtin_gpus", &builtin_gpus);
    m.def("find_gpu", &find_gpu);
    m.def("resolve_gpu", &resolve_gpu,
          "Resolve a --gpu style argument: built-in name, file path, or "
          "$GEMMLINT_GPU_DIR entry");
    m.def("load_gpu_spec", &load_gpu_spec);
    m.def("save_gpu_spec", &save_gpu_spec);
    m.def("alignment_elements", &alignment_elements,
          "Tensor-core alignment requirement in elements of the dtype");

    // ----- gemm -------------------------------------------------------------
    py::class_<GemmShape>(m, "GemmShape")
        .def(py::init<>())
        .def(py::init([](std::int64_t m_, std::int64_t k, std::int64_t n, std::int64_t batch,
                         const std::string& dtype, double alpha, double beta) {
                 return GemmShape{m_, k, n, batch, dtype, alpha, beta};
             }),
             py::arg("m"), py::arg("k"), py::arg("n"), py::arg("batch") = 1,
             py::arg("dtype") = "fp16", py::arg("alpha") = 1.0, py::arg("beta") = 0.0)
        .def_readwrite("m", &GemmShape::m)
        .def_readwrite("k", &GemmShape::k)
        .def_readwrite("n", &GemmShape::n)
        .def_readwrite("batch", &GemmShape::batch)
        .def_readwrite("dtype", &GemmShape::dtype)
        .def_readwrite("alpha", &GemmShape::alpha)
        .def_readwrite("beta", &GemmShape::beta);

    py::class_<TileGrid>(m, "TileGrid")
        .def_readonly("rows", &TileGrid::rows)
        .def_readonly("cols", &TileGrid::cols);

    py::class_<WaveStats>(m, "WaveStats")
        .def_readonly("tile", &WaveStats::tile)
        .def_readonly("grid_rows", &WaveStats::grid_rows)
        .def_readonly("grid_cols", &WaveStats::grid_cols)
        .def_readonly("total_blocks", &WaveStats::total_blocks)
        .def_readonly("full_waves", &WaveStats::full_waves)
        .def_readonly("tail_blocks", &WaveStats::tail_blocks)
        .def_readonly("wave_count", &WaveStats::wave_count)
        .def_readonly("wave_efficiency", &WaveStats::wave_efficiency);

    py::class_<AlignmentEntry>(m, "AlignmentEntry")
        .def_readonly("dim", &AlignmentEntry::dim)
        .def_readonly("value", &AlignmentEntry::value)
        .def_readonly("pow2_divisor", &AlignmentEntry::pow2_divisor)
        .def_readonly("required", &AlignmentEntry::required)
        .def_readonly("aligned", &AlignmentEntry::aligned);

    py::class_<AlignmentReport>(m, "AlignmentReport")
        .def_readonly("dims", &AlignmentReport::dims)
        .def("all_aligned", &AlignmentReport::all_aligned);

    py::class_<ThroughputEstimate>(m, "ThroughputEstimate")
        .def_readonly("tflops", &ThroughputEstimate::tflops)
        .def_readonly("latency_us", &ThroughputEstimate::latency_us)
        .def_readonly("calibrated", &ThroughputEstimate::calibrated);

    py::class_<GemmAnalysis>(m, "GemmAnalysis")
        .def_readonly("shape", &GemmAnalysis::shape)
        .def_readonly("flop_count", &GemmAnalysis::flop_count)
        .def_readonly("byte_count", &GemmAnalysis::byte_count)
        .def_readonly("arithmetic_intensity", &GemmAnalysis::arithmetic_intensity)
        .def_readonly("alignment", &GemmAnalysis::alignment)
        .def_readonly("chosen_tile", &GemmAnalysis::chosen_tile)
        .def_readonly("waves", &GemmAnalysis::waves)
        .def_readonly("tile_waste_fraction", &GemmAnalysis::tile_waste_fraction)
        .def_readonly("predicted_tflops", &GemmAnalysis::predicted_tflops)
        .def_readonly("predicted_latency_us", &GemmAnalysis::predicted_latency_us)
        .def_readonly("calibrated", &GemmAnalysis::calibrated);

    m.def("flops", &flops);
    m.def("bytes_moved", &bytes_moved);
    m.def("tile_grid", &tile_grid);
    m.def("tile_waste", &tile_waste);
    m.def("wave_stats", &wave_stats, py::arg("shape"), py::arg("tile"), py::arg("sm_count"));
    m.def("is_wave_free", &is_wave_free, py::arg("m"), py::arg("n"), py::arg("tile"),
          py::arg("sm_count"), "True when either tile orientation fills whole waves");
    m.def("alignment_report", &alignment_report);
    m.def("select_tile", &select_tile);
    m.def("estimate_throughput", &estimate_throughput, py::arg("shape"), py::arg("gpu"),
          py::arg("calibration") = nullptr);
    m.def("analyze_gemm", &analyze_gemm, py::arg("shape"), py::arg("gpu"),
          py::arg("calibration") = nullptr);
    m.def("largest_pow2_divisor", &largest_pow2_divisor);

    // ----- transformer ------------------------------------------------------
    py::enum_<Activation>(m, "Activation")
        .value("glu_like", Activation::GluLike)
        .value("swiglu", Activation::Swiglu);
    py::enum_<AttentionImpl>(m, "AttentionImpl")
        .value("standard", AttentionImpl::Standard)
        .value("flash", AttentionImpl::Flash);
    py::enum_<LayerLayout>(m, "LayerLayout")
        .value("sequential", LayerLayout::Sequential)
        .value("parallel", LayerLayout::Parallel);
    py::enum_<Positional>(m, "Positional")
        .value("learned", Positional::Learned)
        .value("rotary", Positional::Rotary)
        .value("alibi", Positional::Alibi);
    py::enum_<GemmRole>(m, "GemmRole")
        .value("qkv_transform", GemmRole::QkvTransform)
        .value("attention_score", GemmRole::AttentionScore)
        .value("attention_over_value", GemmRole::AttentionOverValue)
        .value("linear_projection", GemmRole::LinearProjection)
        .value("mlp_up", GemmRole::MlpUp)
        .value("mlp_gate", GemmRole::MlpGate)
        .value("mlp_down", GemmRole::MlpDown)
        .value("logit_output", GemmRole::LogitOutput)
        .value("fused_flash_attention", GemmRole::FusedFlashAttention);

    py::class_<TransformerConfig>(m, "TransformerConfig")
        .def(py::init<>())
        .def_readwrite("a", &TransformerConfig::a)
        .def_readwrite("b", &TransformerConfig::b)
        .def_readwrite("h", &TransformerConfig::h)
        .def_readwrite("L", &TransformerConfig::L)
        .def_readwrite("s", &TransformerConfig::s)
        .def_readwrite("t", &TransformerConfig::t)
        .def_readwrite("v", &TransformerConfig::v)
        .def_readwrite("mlp_ratio", &TransformerConfig::mlp_ratio)
        .def_readwrite("d_ff", &TransformerConfig::d_ff)
        .def_readwrite("activation", &TransformerConfig::activation)
        .def_readwrite("attention_impl", &TransformerConfig::attention_impl)
        .def_readwrite("layer_layout", &TransformerConfig::layer_layout)
        .def_readwrite("positional", &TransformerConfig::positional)
        .def_readwrite("pipeline_stages", &TransformerConfig::pipeline_stages)
        .def_readwrite("vocab_parallel", &TransformerConfig::vocab_parallel)
        .def_readwrite("dtype", &TransformerConfig::dtype)
        .def("effective_d_ff", &TransformerConfig::effective_d_ff)
        .def("validate", &TransformerConfig::validate);

    py::class_<FlashAttentionShape>(m, "FlashAttentionShape")
        .def_readonly("b", &FlashAttentionShape::b)
        .def_readonly("heads_per_gpu", &FlashAttentionShape::heads_per_gpu)
        .def_readonly("s", &FlashAttentionShape::s)
        .def_readonly("head_dim", &FlashAttentionShape::head_dim)
        .def_readonly("dtype", &FlashAttentionShape::dtype)
        .def("flop_count", &FlashAttentionShape::flop_count)
        .def("byte_count", &FlashAttentionShape::byte_count);

    py::class_<LayerEntry>(m, "LayerEntry")
        .def_readonly("label", &LayerEntry::label)
        .def_readonly("role", &LayerEntry::role)
        .def_readonly("gemm", &LayerEntry::gemm)
        .def_readonly("flash", &LayerEntry::flash)
        .def("is_marker", &LayerEntry::is_marker);

    py::class_<LayerDecomposition>(m, "LayerDecomposition")
        .def_readonly("entries", &LayerDecomposition::entries)
        .def_readonly("logit", &LayerDecomposition::logit);

    py::class_<ParamCount>(m, "ParamCount")
        .def_readonly("exact", &ParamCount::exact)
        .def_readonly("approx", &ParamCount::approx)
        .def_readonly("qkv", &ParamCount::qkv)
        .def_readonly("attn_proj", &ParamCount::attn_proj)
        .def_readonly("mlp", &ParamCount::mlp)
        .def_readonly("norms_and_biases", &ParamCount::norms_and_biases)
        .def_readonly("embeddings", &ParamCount::embeddings)
        .def("breakdown_total", &ParamCount::breakdown_total);

    m.def("role_name", &role_name);
    m.def("parse_role", &parse_role);
    m.def("decompose", &decompose);
    m.def("param_count", &param_count);
    m.def("forward_flops_per_layer", &forward_flops_per_layer);
    m.def("latency_proportions", &latency_proportions, py::arg("config"), py::arg("gpu"),
          py::arg("calibration") = nullptr);
    m.def("predicted_layer_latency_us", &predicted_layer_latency_us, py::arg("config"),
          py::arg("gpu"), py::arg("calibration") = nullptr);
    m.def("load_transformer_config", &load_transformer_config);

    // ----- rules ------------------------------------------------------------
    py::enum_<Severity>(m, "Severity")
        .value("info", Severity::Info)
        .value("warn", Severity::Warn)
        .value("error", Severity::Error);

    py::class_<Diagnostic>(m, "Diagnostic")
        .def_readonly("rule_id", &Diagnostic::rule_id)
        .def_readonly("severity", &Diagnostic::severity)
        .def_readonly("subject", &Diagnostic::subject)
        .def_readonly("observed", &Diagnostic::observed)
        .def_readonly("observed_value", &Diagnostic::observed_value)
        .def_readonly("pow2_divisor", &Diagnostic::pow2_divisor)
        .def_readonly("message", &Diagnostic::message)
        .def_readonly("suggestions", &Diagnostic::suggestions);

    py::class_<LintOptions>(m, "LintOptions")
        .def(py::init<>())
        .def_readwrite("wave_threshold", &LintOptions::wave_threshold);

    py::class_<RuleReport>(m, "RuleReport")
        .def_readonly("config", &RuleReport::config)
        .def_readonly("diagnostics", &RuleReport::diagnostics)
        .def_readonly("errors", &RuleReport::errors)
        .def_readonly("warns", &RuleReport::warns)
        .def_readonly("infos", &RuleReport::infos)
        .def_readonly("pass_", &RuleReport::pass)
        .def("first_for",
             [](const RuleReport& report, const std::string& rule) -> std::optional<Diagnostic> {
                 const Diagnostic* d = report.first_for(rule);
                 if (!d) return std::nullopt;
                 return *d;
             });

    m.def("lint", &lint, py::arg("config"), py::arg("gpu"), py::arg("options") = LintOptions{});
    m.def("explain", &explain);
    m.def("all_rule_ids", &all_rule_ids);
    m.def("apply_suggestion", &apply_suggestion);

    // ----- optimizer --------------------------------------------------------
    py::enum_<VaryField>(m, "VaryField")
        .value("a", VaryField::A)
        .value("h", VaryField::H)
        .value("d_ff", VaryField::Dff)
        .value("v", VaryField::V)
        .value("t", VaryField::T);

    py::class_<SearchSpace>(m, "SearchSpace")
        .def(py::init<>())
        .def_readwrite("vary", &SearchSpace::vary)
        .def_readwrite("h_step", &SearchSpace::h_step)
        .def_readwrite("h_window_steps", &SearchSpace::h_window_steps)
        .def_readwrite("d_ff_window", &SearchSpace::d_ff_window)
        .def_readwrite("d_ff_step", &SearchSpace::d_ff_step)
        .def_readwrite("budget_tolerance", &SearchSpace::budget_tolerance)
        .def_readwrite("latency_tie_tolerance", &SearchSpace::latency_tie_tolerance);

    py::class_<Candidate>(m, "Candidate")
        .def_readonly("config", &Candidate::config)
        .def_readonly("param_delta_fraction", &Candidate::param_delta_fraction)
        .def_readonly("predicted_layer_latency_us", &Candidate::predicted_layer_latency_us)
        .def_readonly("report", &Candidate::report)
        .def_readonly("rank", &Candidate::rank)
        .def_readonly("is_baseline", &Candidate::is_baseline);

    py::class_<DffCandidate>(m, "DffCandidate")
        .def_readonly("d_ff", &DffCandidate::d_ff)
        .def_readonly("mlp_latency_us", &DffCandidate::mlp_latency_us)
        .def_readonly("pow2_divisor", &DffCandidate::pow2_divisor);

    m.def("suggest", &suggest, py::arg("config"), py::arg("gpu"), py::arg("space"),
          py::arg("calibration") = nullptr);
    m.def("swiglu_dff_search", &swiglu_dff_search, py::arg("h"), py::arg("target_ratio"),
          py::arg("window"), py::arg("gpu"), py::arg("context"),
          py::arg("calibration") = nullptr);
    m.def("pad_vocab", &pad_vocab);
    m.def("fix_heads", &fix_heads);

    // ----- calibration ------------------------------------------------------
    py::enum_<InterpolationPolicy>(m, "InterpolationPolicy")
        .value("exact_only", InterpolationPolicy::ExactOnly)
        .value("nearest_log_shape", InterpolationPolicy::NearestLogShape);

    py::class_<MeasurementRecord>(m, "MeasurementRecord")
        .def(py::init<>())
        .def_readwrite("gpu_name", &MeasurementRecord::gpu_name)
        .def_readwrite("dtype", &MeasurementRecord::dtype)
        .def_readwrite("batch", &MeasurementRecord::batch)
        .def_readwrite("m", &MeasurementRecord::m)
        .def_readwrite("k", &MeasurementRecord::k)
        .def_readwrite("n", &MeasurementRecord::n)
        .def_readwrite("measured_tflops", &MeasurementRecord::measured_tflops)
        .def_readwrite("repeats", &MeasurementRecord::repeats);

    py::class_<CalibrationTable>(m, "CalibrationTable")
        .def(py::init<InterpolationPolicy>(),
             py::arg("policy") = InterpolationPolicy::ExactOnly)
        .def("insert", &CalibrationTable::insert)
        .def("lookup", &CalibrationTable::lookup)
        .def("exact", &CalibrationTable::exact)
        .def("size", &CalibrationTable::size)
        .def("policy", &CalibrationTable::policy)
        .def("records", &CalibrationTable::records);

    py::class_<PlanRow>(m, "PlanRow")
        .def_readonly("gpu", &PlanRow::gpu)
        .def_readonly("dtype", &PlanRow::dtype)
        .def_readonly("batch", &PlanRow::batch)
        .def_readonly("m", &PlanRow::m)
        .def_readonly("k", &PlanRow::k)
        .def_readonly("n", &PlanRow::n);

    py::class_<SweepSpec>(m, "SweepSpec")
        .def(py::init<>())
        .def_readwrite("field", &SweepSpec::field)
        .def_readwrite("lo", &SweepSpec::lo)
        .def_readwrite("hi", &SweepSpec::hi)
        .def_readwrite("step", &SweepSpec::step)
        .def_readwrite("roles", &SweepSpec::roles)
        .def_readwrite("fixed_head_dim", &SweepSpec::fixed_head_dim);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("x", &SweepRow::x)
        .def_readonly("role", &SweepRow::role)
        .def_readonly("analysis", &SweepRow::analysis);

    py::class_<IngestResult>(m, "IngestResult")
        .def_readonly("table", &IngestResult::table)
        .def_readonly("rows_loaded", &IngestResult::rows_loaded)
        .def_readonly("rows_skipped", &IngestResult::rows_skipped)
        .def_readonly("messages", &IngestResult::messages);

    m.def("emit_bench_plan",
          py::overload_cast<const TransformerConfig&, const GpuSpec&>(&emit_bench_plan));
    m.def("emit_bench_plan",
          py::overload_cast<const TransformerConfig&, const SweepSpec&, const GpuSpec&>(
              &emit_bench_plan));
    m.def("write_plan_csv",
          py::overload_cast<const std::vector<PlanRow>&, const std::string&>(&write_plan_csv));
    m.def("ingest_measurements", &ingest_measurements, py::arg("path"),
          py::arg("policy") = InterpolationPolicy::ExactOnly);
    m.def("run_sweep", &run_sweep, py::arg("base"), py::arg("sweep"), py::arg("gpu"),
          py::arg("calibration") = nullptr);
    m.def("export_sweep",
          py::overload_cast<const std::string&, const std::vector<SweepRow>&,
                            const std::string&>(&export_sweep));

#ifdef GEMMLINT_VERSION
    m.attr("__version__") = GEMMLINT_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
