// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0
//
// gemmlint command-line front end.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "gemmlint/calibration.hpp"
#include "gemmlint/optimizer.hpp"
#include "gemmlint/rules.hpp"

using namespace gemmlint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWarnings = 1;
constexpr int kExitError = 2;
constexpr int kExitUsage = 64;

enum class Format { Table, Csv, Kv };

Format parse_format(const std::string& text) {
    if (text == "table") return Format::Table;
    if (text == "csv") return Format::Csv;
    if (text == "structured-text" || text == "kv") return Format::Kv;
    throw CLI::ValidationError("--format", "expected table, csv, or structured-text");
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Columnar output rendered as an aligned table, CSV, or key-value lines.
struct Sheet {
    std::string name; // key prefix in structured-text mode
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void print(std::ostream& out, Format format) const {
        if (format == Format::Csv) {
            print_delimited(out);
        } else if (format == Format::Kv) {
            print_kv(out);
        } else {
            print_aligned(out);
        }
    }

private:
    void print_delimited(std::ostream& out) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            out << (i ? "," : "") << csv_escape(header[i]);
        }
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << (i ? "," : "") << csv_escape(row[i]);
            }
            out << "\n";
        }
    }

    void print_kv(std::ostream& out) const {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < header.size() && c < rows[r].size(); ++c) {
                out << name << "." << r << "." << header[c] << " = " << rows[r][c] << "\n";
            }
        }
    }

    void print_aligned(std::ostream& out) const {
        std::vector<std::size_t> width(header.size());
        for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
                width[c] = std::max(width[c], row[c].size());
            }
        }
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t c = 0; c < cells.size(); ++c) {
                out << std::left << std::setw(static_cast<int>(width[c]) + 2) << cells[c];
            }
            out << "\n";
        };
        line(header);
        for (const auto& row : rows) line(row);
    }
};

std::string num(std::int64_t value) { return std::to_string(value); }

std::string real(double value, int precision = 3) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << value;
    return out.str();
}

// ---------------------------------------------------------------------------
// shared option groups

struct ConfigFlags {
    std::string config_path;
    std::optional<std::int64_t> a, b, h, L, s, t, v, d_ff, pipeline_stages;
    std::optional<double> mlp_ratio;
    std::optional<std::string> activation, attention, layout, positional, dtype;
    bool vocab_parallel = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "Model config file (key = value)");
        cmd.add_option("--a", a, "Attention heads");
        cmd.add_option("--b", b, "Microbatch size");
        cmd.add_option("--h", h, "Hidden dimension");
        cmd.add_option("--L", L, "Transformer layer count");
        cmd.add_option("--s", s, "Sequence length");
        cmd.add_option("--t", t, "Tensor-parallel size");
        cmd.add_option("--v", v, "Vocabulary size");
        cmd.add_option("--d-ff", d_ff, "Explicit MLP intermediate size");
        cmd.add_option("--mlp-ratio", mlp_ratio, "MLP expansion ratio (default 4)");
        cmd.add_option("--activation", activation, "glu_like or swiglu");
        cmd.add_option("--attention", attention, "standard or flash");
        cmd.add_option("--layout", layout, "sequential or parallel");
        cmd.add_option("--positional", positional, "learned, rotary, or alibi");
        cmd.add_option("--pipeline-stages", pipeline_stages, "Pipeline-parallel stages");
        cmd.add_flag("--vocab-parallel", vocab_parallel, "Split the logit GEMM's v by t");
        cmd.add_option("--dtype", dtype, "Element type (default fp16)");
    }

    TransformerConfig build(bool require_h = true) const {
        TransformerConfig cfg;
        if (!config_path.empty()) cfg = load_transformer_config(config_path);
        // inline flags override file values field by field
        if (a) cfg.a = *a;
        if (b) cfg.b = *b;
        if (h) cfg.h = *h;
        if (L) cfg.L = *L;
        if (s) cfg.s = *s;
        if (t) cfg.t = *t;
        if (v) cfg.v = *v;
        if (d_ff) cfg.d_ff = *d_ff;
        if (mlp_ratio) cfg.mlp_ratio = *mlp_ratio;
        if (activation) cfg.activation = parse_activation(*activation);
        if (attention) cfg.attention_impl = parse_attention_impl(*attention);
        if (layout) cfg.layer_layout = parse_layer_layout(*layout);
        if (positional) cfg.positional = parse_positional(*positional);
        if (pipeline_stages) cfg.pipeline_stages = *pipeline_stages;
        if (vocab_parallel) cfg.vocab_parallel = true;
        if (dtype) cfg.dtype = *dtype;
        if (cfg.h < 1) {
            if (require_h) {
                throw std::invalid_argument("a model config is required: pass --h (and "
                                            "friends) or --config <file>");
            }
            return cfg; // caller supplies h before use
        }
        cfg.validate();
        return cfg;
    }
};

struct CommonFlags {
    std::string gpu_arg;
    std::string format_text = "table";
    std::string calibration_path;
    std::string output_path;

    void attach(CLI::App& cmd, bool gpu_required) {
        auto* gpu_opt = cmd.add_option("--gpu", gpu_arg,
                                       "GPU: built-in name (V100, A100, H100, MI250X), spec "
                                       "file path, or name under $GEMMLINT_GPU_DIR");
        if (gpu_required) gpu_opt->required();
        cmd.add_option("--format", format_text, "table, csv, or structured-text");
        cmd.add_option("--calibration", calibration_path,
                       "Measurement CSV used to override analytical estimates");
        cmd.add_option("-o,--output", output_path, "Write output to a file instead of stdout");
    }

    Format format() const { return parse_format(format_text); }

    std::optional<CalibrationTable> load_calibration() const {
        if (calibration_path.empty()) return std::nullopt;
        IngestResult result =
            ingest_measurements(calibration_path, InterpolationPolicy::ExactOnly);
        for (const std::string& message : result.messages) {
            std::cerr << calibration_path << ": " << message << "\n";
        }
        return std::move(result.table);
    }

    /// Runs fn against stdout or the -o file.
    int with_stream(const std::function<int(std::ostream&)>& fn) const {
        if (output_path.empty()) return fn(std::cout);
        std::ofstream out(output_path);
        if (!out) throw std::runtime_error("cannot write '" + output_path + "'");
        return fn(out);
    }
};

SweepSpec parse_sweep(const std::string& text) {
    // field:lo:hi[:step]
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4) {
        throw std::invalid_argument("--sweep expects field:lo:hi[:step], got '" + text + "'");
    }
    SweepSpec spec;
    spec.field = parts[0];
    spec.lo = std::stoll(parts[1]);
    spec.hi = std::stoll(parts[2]);
    spec.step = parts.size() == 4 ? std::stoll(parts[3]) : 1;
    return spec;
}

std::vector<GemmRole> parse_roles(const std::string& text) {
    std::vector<GemmRole> roles;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto role = parse_role(item);
        if (!role) throw std::invalid_argument("unknown role '" + item + "'");
        roles.push_back(*role);
    }
    return roles;
}

double parse_ratio(const std::string& text) {
    const std::size_t slash = text.find('/');
    if (slash == std::string::npos) return std::stod(text);
    return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
}

// ---------------------------------------------------------------------------
// subcommands

int run_lint(const ConfigFlags& config_flags, const CommonFlags& common,
             double wave_threshold) {
    const TransformerConfig cfg = config_flags.build();
    const GpuSpec gpu = resolve_gpu(common.gpu_arg);
    LintOptions options;
    options.wave_threshold = wave_threshold;
    const RuleReport report = lint(cfg, gpu, options);

    Sheet sheet;
    sheet.name = "diagnostic";
    sheet.header = {"rule", "severity", "subject", "observed", "suggestion", "message"};
    for (const Diagnostic& d : report.diagnostics) {
        std::string suggestion;
        for (std::size_t i = 0; i < d.suggestions.size(); ++i) {
            if (i) suggestion += " ";
            suggestion += std::to_string(d.suggestions[i]);
        }
        sheet.add({d.rule_id, to_string(d.severity), d.subject, d.observed, suggestion,
                   d.message});
    }

    return common.with_stream([&](std::ostream& out) {
        sheet.print(out, common.format());
        if (common.format() == Format::Table) {
            out << "\n"
                << (report.pass ? "pass" : "fail") << ": " << report.errors << " error(s), "
                << report.warns << " warning(s), " << report.infos << " info\n";
            if (!report.pass) {
                out << "run `gemmlint explain <rule>` for the reasoning behind a rule\n";
            }
        } else if (common.format() == Format::Kv) {
            out << "summary.errors = " << report.errors << "\n";
            out << "summary.warns = " << report.warns << "\n";
            out << "summary.infos = " << report.infos << "\n";
            out << "summary.pass = " << (report.pass ? "true" : "false") << "\n";
        }
        if (report.errors > 0) return kExitError;
        if (report.warns > 0) return kExitWarnings;
        return kExitOk;
    });
}

int run_decompose(const ConfigFlags& config_flags, const CommonFlags& common) {
    const TransformerConfig cfg = config_flags.build();
    const LayerDecomposition dec = decompose(cfg);

    std::optional<GpuSpec> gpu;
    if (!common.gpu_arg.empty()) gpu = resolve_gpu(common.gpu_arg);
    const auto calibration = common.load_calibration();
    const CalibrationTable* table = calibration ? &*calibration : nullptr;

    std::map<GemmRole, double> shares;
    if (gpu) shares = latency_proportions(cfg, *gpu, table);

    Sheet sheet;
    sheet.name = "op";
    sheet.header = {"op", "batch", "m", "k", "n", "flops", "bytes"};
    if (gpu) {
        for (const char* col : {"tile", "waves", "wave_eff", "aligned", "tflops",
                                "latency_us", "layer_share"}) {
            sheet.header.push_back(col);
        }
    }

    auto add_entry = [&](const LayerEntry& entry, bool model_level) {
        std::vector<std::string> row;
        if (entry.is_marker()) {
            row = {entry.label, "", "", "", "", "", ""};
            if (gpu) row.insert(row.end(), {"", "", "", "", "", "", ""});
            sheet.add(std::move(row));
            return;
        }
        if (entry.flash) {
            const FlashAttentionShape& f = *entry.flash;
            row = {entry.label, num(f.b * f.heads_per_gpu), num(f.s), num(f.head_dim),
                   num(f.s), num(f.flop_count()), num(f.byte_count())};
            if (gpu) {
                const double share =
                    shares.count(*entry.role) ? shares.at(*entry.role) : 0.0;
                row.insert(row.end(),
                           {"-", "-", "-", "-", "-", "-", real(share, 4)});
            }
            sheet.add(std::move(row));
            return;
        }
        const GemmShape& g = *entry.gemm;
        row = {entry.label, num(g.batch), num(g.m), num(g.k), num(g.n), num(flops(g)),
               num(bytes_moved(g))};
        if (gpu) {
            const GemmAnalysis analysis = analyze_gemm(g, *gpu, table);
            const double share =
                !model_level && shares.count(*entry.role) ? shares.at(*entry.role) : 0.0;
            row.insert(row.end(),
                       {to_string(analysis.chosen_tile), num(analysis.waves.wave_count),
                        real(analysis.waves.wave_efficiency, 4),
                        analysis.alignment.all_aligned() ? "yes" : "no",
                        real(analysis.predicted_tflops, 2),
                        real(analysis.predicted_latency_us, 2),
                        model_level ? "-" : real(share, 4)});
        }
        sheet.add(std::move(row));
    };

    for (const LayerEntry& entry : dec.entries) add_entry(entry, false);
    add_entry(dec.logit, true);

    return common.with_stream([&](std::ostream& out) {
        sheet.print(out, common.format());
        return kExitOk;
    });
}

int run_params(const ConfigFlags& config_flags, const CommonFlags& common) {
    const ParamCount params = param_count(config_flags.build());
    Sheet sheet;
    sheet.name = "params";
    sheet.header = {"component", "parameters"};
    sheet.add({"qkv", num(params.qkv)});
    sheet.add({"attn_proj", num(params.attn_proj)});
    sheet.add({"mlp", num(params.mlp)});
    sheet.add({"norms_and_biases", num(params.norms_and_biases)});
    sheet.add({"embeddings", num(params.embeddings)});
    sheet.add({"total", num(params.breakdown_total())});
    sheet.add({"exact", num(params.exact)});
    sheet.add({"approx_12h2L", num(params.approx)});
    return common.with_stream([&](std::ostream& out) {
        sheet.print(out, common.format());
        return kExitOk;
    });
}

int run_flops(const ConfigFlags& config_flags, const CommonFlags& common) {
    const TransformerConfig cfg = config_flags.build();
    const LayerDecomposition dec = decompose(cfg);

    std::int64_t per_gpu_layer = 0;
    for (const LayerEntry* entry : dec.gemm_entries(false)) {
        per_gpu_layer += entry->gemm ? flops(*entry->gemm) : 0;
    }
    for (const LayerEntry& entry : dec.entries) {
        if (entry.flash) per_gpu_layer += entry.flash->flop_count();
    }
    const std::int64_t replica_layer = per_gpu_layer * cfg.t;
    const bool canonical =
        cfg.activation == Activation::GluLike && cfg.effective_d_ff() == 4 * cfg.h &&
        cfg.attention_impl == AttentionImpl::Standard;

    Sheet sheet;
    sheet.name = "flops";
    sheet.header = {"quantity", "flops"};
    sheet.add({"layer_forward_per_gpu", num(per_gpu_layer)});
    sheet.add({"layer_forward_replica", num(replica_layer)});
    if (canonical) {
        sheet.add({"layer_forward_closed_form", num(forward_flops_per_layer(cfg))});
    }
    sheet.add({"all_layers_forward", num(replica_layer * cfg.L)});
    sheet.add({"logit_output", num(flops(*dec.logit.gemm) * (cfg.vocab_parallel ? cfg.t : 1))});
    return common.with_stream([&](std::ostream& out) {
        sheet.print(out, common.format());
        return kExitOk;
    });
}

int run_wave(const CommonFlags& common, std::int64_t m, std::int64_t n, std::int64_t batch,
             const std::string& tile_text, int sms) {
    const TileSpec tile = parse_tile(tile_text);
    if (sms <= 0) {
        if (common.gpu_arg.empty()) {
            throw std::invalid_argument("pass --sms <count> or --gpu <name>");
        }
        sms = resolve_gpu(common.gpu_arg).sm_count;
    }
    const GemmShape shape{m, 1, n, batch, "fp16"};
    const WaveStats stats = wave_stats(shape, tile, sms);

    Sheet sheet;
    sheet.name = "wave";
    sheet.header = {"quantity", "value"};
    sheet.add({"tile", to_string(tile)});
    sheet.add({"grid", num(stats.grid_rows) + "x" + num(stats.grid_cols)});
    sheet.add({"total_blocks", num(stats.total_blocks)});
    sheet.add({"full_waves", num(stats.full_waves)});
    sheet.add({"tail_blocks", num(stats.tail_blocks)});
    sheet.add({"wave_count", num(stats.wave_count)});
    sheet.add({"wave_efficiency", real(stats.wave_efficiency, 6)});
    sheet.add({"tile_waste", real(tile_waste(m, n, tile), 6)});
    sheet.add({"wave_free_either_orientation",
               is_wave_free(m, n, tile, sms) ? "true" : "false"});
    return common.with_stream([&](std::ostream& out) {
        sheet.print(out, common.format());
        return kExitOk;
    });
}

int run_suggest(const ConfigFlags& config_flags, const CommonFlags& common,
                const std::string& vary_text, SearchSpace space, std::size_t limit) {
    const TransformerConfig cfg = config_flags.build();
    const GpuSpec gpu = resolve_gpu(common.gpu_arg);

    std::stringstream in(vary_text);
    std::string item;
    while (std::getline(in, item, ',')) space.vary.insert(parse_vary_field(item));

    const auto calibration = common.load_calibration();
    const auto candidates =
        suggest(cfg, gpu, space, calibration ? &*calibration : nullptr);

    Sheet sheet;
    sheet.name = "candidate";
    sheet.header = {"rank", "a", "h", "d_ff", "v", "t", "warns",
                    "latency_us", "param_delta_pct", "baseline"};
    for (const Candidate& c : candidates) {
        if (sheet.rows.size() >= limit) break;
        sheet.add({num(c.rank), num(c.config.a), num(c.config.h),
                   num(c.config.effective_d_ff()), num(c.config.v), num(c.config.t),
                   num(c.report.warns), real(c.predicted_layer_latency_us, 2),
                   real(100.0 * c.param_delta_fraction, 3), c.is_baseline ? "yes" : ""});
    }

    return common.with_stream([&](std::ostream& out) {
        if (candidates.empty()) {
            out << "no candidate satisfied the constraints (distinct outcome, not an "
                   "error); widen --vary or --budget-tol\n";
            return kExitOk;
        }
        sheet.print(out, common.format());
        if (common.format() == Format::Table) {
            if (candidates.front().is_baseline) {
                out << "\nthe baseline configuration is already the best candidate\n";
            }
            out << "\naccuracy caveat: fewer heads or a different d_ff can shift model "
                   "quality; validate on your task before committing\n";
        }
        return kExitOk;
    });
}

int run_swiglu_search(const ConfigFlags& config_flags, const CommonFlags& common,
                      std::optional<std::int64_t> h_opt, const std::string& ratio_text,
                      std::int64_t window, std::size_t limit) {
    TransformerConfig context = config_flags.build(/*require_h=*/false);
    const std::int64_t h = h_opt ? *h_opt : context.h;
    if (h < 1) throw std::invalid_argument("pass --target-h, --h, or --config");
    context.h = h;
    context.activation = Activation::Swiglu;
    context.validate();
    const GpuSpec gpu = resolve_gpu(common.gpu_arg);
    const double ratio = parse_ratio(ratio_text);

    const auto calibration = common.load_calibration();
    const auto results = swiglu_dff_search(h, ratio, window, gpu, context,
                                           calibration ? &*calibration : nullptr);
    const std::int64_t target = std::llround(ratio * static_cast<double>(h));

    Sheet sheet;
    sheet.name = "dff";
    sheet.header = {"d_ff", "pow2_divisor", "mlp_latency_us", "distance_from_target"};
    for (const DffCandidate& cand : results) {
        if (sheet.rows.size() >= limit) break;
        sheet.add({num(cand.d_ff), num(cand.pow2_divisor), real(cand.mlp_latency_us, 2),
                   num(std::abs(cand.d_ff - target))});
    }
    return common.with_stream([&](std::ostream& out) {
        sheet.print(out, common.format());
        return kExitOk;
    });
}

int run_bench_plan(const ConfigFlags& config_flags, const CommonFlags& common,
                   const std::string& sweep_text, const std::string& roles_text,
                   std::optional<std::int64_t> fix_head_dim) {
    const GpuSpec gpu = resolve_gpu(common.gpu_arg);
    std::vector<PlanRow> rows;
    if (sweep_text.empty()) {
        rows = emit_bench_plan(config_flags.build(), gpu);
    } else {
        SweepSpec sweep = parse_sweep(sweep_text);
        if (!roles_text.empty()) sweep.roles = parse_roles(roles_text);
        sweep.fixed_head_dim = fix_head_dim;
        rows = emit_bench_plan(config_flags.build(), sweep, gpu);
    }
    return common.with_stream([&](std::ostream& out) {
        write_plan_csv(rows, out);
        return kExitOk;
    });
}

int run_ingest(const CommonFlags& common, const std::string& input,
               const std::string& policy_text) {
    const InterpolationPolicy policy = policy_text == "nearest_log_shape"
                                           ? InterpolationPolicy::NearestLogShape
                                           : InterpolationPolicy::ExactOnly;
    const IngestResult result = ingest_measurements(input, policy);
    for (const std::string& message : result.messages) std::cerr << message << "\n";
    std::cout << "loaded " << result.rows_loaded << " measurement(s), skipped "
              << result.rows_skipped << "\n";
    if (!common.output_path.empty()) {
        std::ofstream out(common.output_path);
        if (!out) throw std::runtime_error("cannot write '" + common.output_path + "'");
        write_measurements_csv(result.table.records(), out);
        std::cout << "wrote deduplicated table to " << common.output_path << "\n";
    }
    return kExitOk;
}

int run_cli_sweep(const ConfigFlags& config_flags, const CommonFlags& common,
                  const std::string& sweep_text, const std::string& roles_text,
                  std::optional<std::int64_t> fix_head_dim) {
    const GpuSpec gpu = resolve_gpu(common.gpu_arg);
    SweepSpec sweep = parse_sweep(sweep_text);
    if (!roles_text.empty()) sweep.roles = parse_roles(roles_text);
    sweep.fixed_head_dim = fix_head_dim;

    const auto calibration = common.load_calibration();
    const auto rows = run_sweep(config_flags.build(), sweep, gpu,
                                calibration ? &*calibration : nullptr);
    return common.with_stream([&](std::ostream& out) {
        export_sweep(sweep.field, rows, out);
        return kExitOk;
    });
}

int run_explain(const std::string& rule_id) {
    std::cout << explain(rule_id) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gemmlint: map transformer shapes onto their GEMM kernels, lint them "
                 "against GPU efficiency rules, and search for better shapes"};
    app.require_subcommand(1);
    // --h is the hidden-dimension flag, so help lives on --help alone
    app.set_help_flag("--help", "Print help and exit");

    // lint
    auto* lint_cmd = app.add_subcommand("lint", "Check a model config against rules R1..R12");
    ConfigFlags lint_cfg;
    CommonFlags lint_common;
    double wave_threshold = 0.9;
    lint_cfg.attach(*lint_cmd);
    lint_common.attach(*lint_cmd, /*gpu_required=*/true);
    lint_cmd->add_option("--wave-threshold", wave_threshold,
                         "R9 fires below this wave efficiency (default 0.9)");

    // decompose
    auto* dec_cmd = app.add_subcommand("decompose", "List the GEMM/BMM kernels of one layer");
    ConfigFlags dec_cfg;
    CommonFlags dec_common;
    dec_cfg.attach(*dec_cmd);
    dec_common.attach(*dec_cmd, /*gpu_required=*/false);

    // params
    auto* params_cmd = app.add_subcommand("params", "Parameter count and breakdown");
    ConfigFlags params_cfg;
    CommonFlags params_common;
    params_cfg.attach(*params_cmd);
    params_common.attach(*params_cmd, /*gpu_required=*/false);

    // flops
    auto* flops_cmd = app.add_subcommand("flops", "Forward-pass FLOP totals");
    ConfigFlags flops_cfg;
    CommonFlags flops_common;
    flops_cfg.attach(*flops_cmd);
    flops_common.attach(*flops_cmd, /*gpu_required=*/false);

    // wave
    auto* wave_cmd = app.add_subcommand("wave", "Tile grid and wave statistics for one GEMM");
    CommonFlags wave_common;
    std::int64_t wave_m = 0, wave_n = 0, wave_batch = 1;
    std::string wave_tile = "128x256";
    int wave_sms = 0;
    wave_cmd->add_option("--m", wave_m, "Output rows")->required();
    wave_cmd->add_option("--n", wave_n, "Output cols")->required();
    wave_cmd->add_option("--batch", wave_batch, "BMM batch (default 1)");
    wave_cmd->add_option("--tile", wave_tile, "Tile, e.g. 128x256 (default)");
    wave_cmd->add_option("--sms", wave_sms, "Streaming multiprocessor count");
    wave_common.attach(*wave_cmd, /*gpu_required=*/false);

    // suggest
    auto* suggest_cmd =
        app.add_subcommand("suggest", "Search for parameter-preserving faster shapes");
    ConfigFlags suggest_cfg;
    CommonFlags suggest_common;
    SearchSpace space;
    std::string vary_text = "a";
    std::size_t suggest_limit = 10;
    suggest_cfg.attach(*suggest_cmd);
    suggest_common.attach(*suggest_cmd, /*gpu_required=*/true);
    suggest_cmd->add_option("--vary", vary_text,
                            "Comma list of fields to vary: a,h,d_ff,v,t (default a)");
    suggest_cmd->add_option("--budget-tol", space.budget_tolerance,
                            "Parameter budget tolerance (default 0.02)");
    suggest_cmd->add_option("--h-step", space.h_step, "h step (default 64)");
    suggest_cmd->add_option("--h-window", space.h_window_steps,
                            "h window in steps (default 8)");
    suggest_cmd->add_option("--dff-window", space.d_ff_window, "d_ff window (default 1024)");
    suggest_cmd->add_option("--dff-step", space.d_ff_step, "d_ff step (default 64)");
    suggest_cmd->add_option("--latency-tol", space.latency_tie_tolerance,
                            "Latency tie band vs the fastest candidate (default 0.35)");
    suggest_cmd->add_option("--top", suggest_limit, "Rows to print (default 10)");

    // swiglu-search
    auto* dff_cmd =
        app.add_subcommand("swiglu-search", "Brute-force d_ff scan for swiglu MLPs");
    ConfigFlags dff_cfg;
    CommonFlags dff_common;
    std::optional<std::int64_t> dff_h;
    std::string ratio_text = "8/3";
    std::int64_t dff_window = 512;
    std::size_t dff_limit = 20;
    dff_cfg.attach(*dff_cmd);
    dff_common.attach(*dff_cmd, /*gpu_required=*/true);
    dff_cmd->add_option("--target-h", dff_h, "Hidden size (defaults to the config's h)");
    dff_cmd->add_option("--ratio", ratio_text, "Target d_ff/h ratio, e.g. 8/3 or 3.5");
    dff_cmd->add_option("--window", dff_window, "Scan half-width (default 512)");
    dff_cmd->add_option("--top", dff_limit, "Rows to print (default 20)");

    // bench-plan
    auto* plan_cmd =
        app.add_subcommand("bench-plan", "Emit the GEMM shapes to measure, as plan CSV");
    ConfigFlags plan_cfg;
    CommonFlags plan_common;
    std::string plan_sweep, plan_roles;
    std::optional<std::int64_t> plan_fix_head;
    plan_cfg.attach(*plan_cmd);
    plan_common.attach(*plan_cmd, /*gpu_required=*/true);
    plan_cmd->add_option("--sweep", plan_sweep, "field:lo:hi[:step] grid instead of one config");
    plan_cmd->add_option("--roles", plan_roles, "Comma list of roles to keep");
    plan_cmd->add_option("--fix-head-dim", plan_fix_head,
                         "Hold h/a constant while h sweeps");

    // ingest
    auto* ingest_cmd =
        app.add_subcommand("ingest", "Validate a measurement CSV and report its contents");
    CommonFlags ingest_common;
    std::string ingest_input, ingest_policy = "exact_only";
    ingest_cmd->add_option("input", ingest_input, "Measurement CSV path")->required();
    ingest_cmd->add_option("--policy", ingest_policy, "exact_only or nearest_log_shape");
    ingest_common.attach(*ingest_cmd, /*gpu_required=*/false);

    // sweep
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Predict throughput across a config sweep, as CSV");
    ConfigFlags sweep_cfg;
    CommonFlags sweep_common;
    std::string sweep_text, sweep_roles;
    std::optional<std::int64_t> sweep_fix_head;
    sweep_cfg.attach(*sweep_cmd);
    sweep_common.attach(*sweep_cmd, /*gpu_required=*/true);
    sweep_cmd->add_option("--sweep", sweep_text, "field:lo:hi[:step]")->required();
    sweep_cmd->add_option("--roles", sweep_roles, "Comma list of roles to keep");
    sweep_cmd->add_option("--fix-head-dim", sweep_fix_head,
                          "Hold h/a constant while h sweeps");

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "Why a rule exists");
    std::string explain_rule;
    explain_cmd->add_option("rule", explain_rule, "Rule id, R1..R12")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (lint_cmd->parsed()) return run_lint(lint_cfg, lint_common, wave_threshold);
        if (dec_cmd->parsed()) return run_decompose(dec_cfg, dec_common);
        if (params_cmd->parsed()) return run_params(params_cfg, params_common);
        if (flops_cmd->parsed()) return run_flops(flops_cfg, flops_common);
        if (wave_cmd->parsed()) {
            return run_wave(wave_common, wave_m, wave_n, wave_batch, wave_tile, wave_sms);
        }
        if (suggest_cmd->parsed()) {
            return run_suggest(suggest_cfg, suggest_common, vary_text, space, suggest_limit);
        }
        if (dff_cmd->parsed()) {
            return run_swiglu_search(dff_cfg, dff_common, dff_h, ratio_text, dff_window,
                                     dff_limit);
        }
        if (plan_cmd->parsed()) {
            return run_bench_plan(plan_cfg, plan_common, plan_sweep, plan_roles,
                                  plan_fix_head);
        }
        if (ingest_cmd->parsed()) return run_ingest(ingest_common, ingest_input, ingest_policy);
        if (sweep_cmd->parsed()) {
            return run_cli_sweep(sweep_cfg, sweep_common, sweep_text, sweep_roles,
                                 sweep_fix_head);
        }
        if (explain_cmd->parsed()) return run_explain(explain_rule);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
