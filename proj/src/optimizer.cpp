// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include "gemmlint/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gemmlint/calibration.hpp"

namespace gemmlint {

std::string to_string(VaryField f) {
    switch (f) {
        case VaryField::A: return "a";
        case VaryField::H: return "h";
        case VaryField::Dff: return "d_ff";
        case VaryField::V: return "v";
        case VaryField::T: return "t";
    }
    return "unknown";
}

VaryField parse_vary_field(std::string_view text) {
    if (text == "a") return VaryField::A;
    if (text == "h") return VaryField::H;
    if (text == "d_ff" || text == "dff") return VaryField::Dff;
    if (text == "v") return VaryField::V;
    if (text == "t") return VaryField::T;
    throw std::invalid_argument("unknown search field '" + std::string(text) +
                                "' (expected a, h, d_ff, v, or t)");
}

std::int64_t pad_vocab(std::int64_t v) {
    if (v < 1) throw std::invalid_argument("vocabulary size must be >= 1");
    return (v + 63) / 64 * 64;
}

std::vector<std::int64_t> fix_heads(std::int64_t h, std::int64_t a) {
    if (h < 64) throw std::invalid_argument("fix_heads requires h >= 64");
    if (a < 1) throw std::invalid_argument("fix_heads requires a >= 1");
    if (h % 64 != 0) return {}; // no divisor of h can make h/a' a multiple of 64

    std::vector<std::int64_t> out;
    for (std::int64_t d = 1; d * d <= h; ++d) {
        if (h % d != 0) continue;
        if ((h / d) % 64 == 0) out.push_back(d);
        const std::int64_t counterpart = h / d;
        if (counterpart != d && (h / counterpart) % 64 == 0) out.push_back(counterpart);
    }
    std::sort(out.begin(), out.end(), [&](std::int64_t x, std::int64_t y) {
        const std::int64_t dx = std::abs(x - a);
        const std::int64_t dy = std::abs(y - a);
        if (dx != dy) return dx < dy;
        return x > y;
    });
    return out;
}

std::vector<DffCandidate> swiglu_dff_search(std::int64_t h, double target_ratio,
                                            std::int64_t window, const GpuSpec& gpu,
                                            const TransformerConfig& context,
                                            const CalibrationTable* calibration) {
    if (h < 64) throw std::invalid_argument("swiglu_dff_search requires h >= 64");
    if (window < 0) throw std::invalid_argument("window must be >= 0");

    const std::int64_t target = std::llround(target_ratio * static_cast<double>(h));
    const std::int64_t lo = std::max<std::int64_t>(1, target - window);
    const std::int64_t hi = target + window;
    const std::int64_t bs = context.b * context.s;

    std::vector<DffCandidate> out;
    for (std::int64_t dff = lo; dff <= hi; ++dff) {
        if (dff % context.t != 0) continue; // would not decompose at this t
        const std::int64_t per_gpu = dff / context.t;

        const GemmShape up{bs, h, per_gpu, 1, context.dtype};
        const GemmShape down{bs, per_gpu, h, 1, context.dtype};
        const double up_us = estimate_throughput(up, gpu, calibration).latency_us;
        const double down_us = estimate_throughput(down, gpu, calibration).latency_us;
        // gate has the up projection's shape
        out.push_back({dff, 2.0 * up_us + down_us, largest_pow2_divisor(per_gpu)});
    }

    std::stable_sort(out.begin(), out.end(), [&](const DffCandidate& x, const DffCandidate& y) {
        const bool x_ok = x.pow2_divisor >= 64;
        const bool y_ok = y.pow2_divisor >= 64;
        if (x_ok != y_ok) return x_ok;
        if (x.mlp_latency_us != y.mlp_latency_us) return x.mlp_latency_us < y.mlp_latency_us;
        const std::int64_t dx = std::abs(x.d_ff - target);
        const std::int64_t dy = std::abs(y.d_ff - target);
        if (dx != dy) return dx < dy;
        return x.d_ff < y.d_ff;
    });
    return out;
}

namespace {

std::vector<std::int64_t> divisors_of(std::int64_t value) {
    std::vector<std::int64_t> out;
    for (std::int64_t d = 1; d * d <= value; ++d) {
        if (value % d != 0) continue;
        out.push_back(d);
        if (d != value / d) out.push_back(value / d);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double relative_distance(std::int64_t x, std::int64_t base) {
    return static_cast<double>(std::abs(x - base)) /
           static_cast<double>(std::max<std::int64_t>(base, 1));
}

/// Aggregate shape distance from the original config, the final ranking key.
double closeness(const TransformerConfig& c, const TransformerConfig& base) {
    return relative_distance(c.a, base.a) + relative_distance(c.h, base.h) +
           relative_distance(c.effective_d_ff(), base.effective_d_ff()) +
           relative_distance(c.v, base.v) + relative_distance(c.t, base.t);
}

std::array<std::int64_t, 5> lex_key(const TransformerConfig& c) {
    return {c.a, c.h, c.effective_d_ff(), c.v, c.t};
}

} // namespace

std::vector<Candidate> suggest(const TransformerConfig& cfg, const GpuSpec& gpu,
                               const SearchSpace& space, const CalibrationTable* calibration) {
    cfg.validate();
    const double base_params =
        static_cast<double>(param_count(cfg).breakdown_total());

    auto varied = [&](VaryField f) { return space.vary.count(f) != 0; };

    std::vector<std::int64_t> hs{cfg.h};
    if (varied(VaryField::H)) {
        for (int j = -space.h_window_steps; j <= space.h_window_steps; ++j) {
            const std::int64_t h = cfg.h + j * space.h_step;
            if (h >= 1 && h != cfg.h) hs.push_back(h);
        }
        std::sort(hs.begin(), hs.end());
    }

    // v only ever pads upward: entries below the given size would drop tokens
    std::vector<std::int64_t> vs{cfg.v};
    if (varied(VaryField::V)) {
        vs.push_back(pad_vocab(cfg.v));
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    }

    std::vector<std::int64_t> ts{cfg.t};
    if (varied(VaryField::T)) {
        ts = {1, 2, 4, 6, 8};
        if (std::find(ts.begin(), ts.end(), cfg.t) == ts.end()) ts.push_back(cfg.t);
        std::sort(ts.begin(), ts.end());
    }

    std::vector<Candidate> pool;
    for (const std::int64_t h : hs) {
        std::vector<std::int64_t> as{cfg.a};
        if (varied(VaryField::A)) as = divisors_of(h);

        std::vector<std::optional<std::int64_t>> dffs{cfg.d_ff};
        if (varied(VaryField::Dff)) {
            dffs.clear();
            TransformerConfig probe = cfg;
            probe.h = h;
            const std::int64_t base_dff = probe.effective_d_ff();
            for (std::int64_t dff = base_dff - space.d_ff_window;
                 dff <= base_dff + space.d_ff_window; dff += space.d_ff_step) {
                if (dff >= 1) dffs.emplace_back(dff);
            }
        }

        for (const std::int64_t a : as) {
            for (const std::optional<std::int64_t>& dff : dffs) {
                for (const std::int64_t v : vs) {
                    for (const std::int64_t t : ts) {
                        TransformerConfig c = cfg;
                        c.a = a;
                        c.h = h;
                        c.d_ff = dff;
                        c.v = v;
                        c.t = t;
                        if (!divisibility_issues(c).empty()) continue;

                        const double params =
                            static_cast<double>(param_count(c).breakdown_total());
                        const double delta = (params - base_params) / base_params;
                        if (std::abs(delta) > space.budget_tolerance) continue;

                        Candidate cand;
                        cand.config = c;
                        cand.param_delta_fraction = delta;
                        cand.report = lint(c, gpu);
                        if (cand.report.errors > 0) continue;
                        cand.predicted_layer_latency_us =
                            predicted_layer_latency_us(c, gpu, calibration);
                        cand.is_baseline = lex_key(c) == lex_key(cfg);
                        pool.push_back(std::move(cand));
                    }
                }
            }
        }
    }

    if (pool.empty()) return pool;

    // Rank: compliance first, then latency. Candidates at different t are
    // compared by GPU-time per replica (latency * t); per-GPU latency alone
    // would reward splitting the work across more GPUs. Latencies within
    // the tie tolerance of the fastest compliant candidate count as equal
    // and settle on parameter delta, then closeness to the original shape.
    auto gpu_time = [](const Candidate& c) {
        return c.predicted_layer_latency_us * static_cast<double>(c.config.t);
    };
    int min_warns = pool.front().report.warns;
    for (const Candidate& c : pool) min_warns = std::min(min_warns, c.report.warns);
    double best_latency = 0.0;
    bool first = true;
    for (const Candidate& c : pool) {
        if (c.report.warns != min_warns) continue;
        if (first || gpu_time(c) < best_latency) {
            best_latency = gpu_time(c);
            first = false;
        }
    }
    const double cutoff = best_latency * (1.0 + space.latency_tie_tolerance);

    auto in_top_group = [&](const Candidate& c) {
        return c.report.warns == min_warns && gpu_time(c) <= cutoff;
    };
    std::vector<Candidate> top;
    std::vector<Candidate> rest;
    for (Candidate& c : pool) {
        (in_top_group(c) ? top : rest).push_back(std::move(c));
    }

    std::stable_sort(top.begin(), top.end(), [&](const Candidate& x, const Candidate& y) {
        const double dx = std::abs(x.param_delta_fraction);
        const double dy = std::abs(y.param_delta_fraction);
        if (dx != dy) return dx < dy;
        const double cx = closeness(x.config, cfg);
        const double cy = closeness(y.config, cfg);
        if (cx != cy) return cx < cy;
        return lex_key(x.config) < lex_key(y.config);
    });
    std::stable_sort(rest.begin(), rest.end(), [&](const Candidate& x, const Candidate& y) {
        if (x.report.warns != y.report.warns) return x.report.warns < y.report.warns;
        if (gpu_time(x) != gpu_time(y)) return gpu_time(x) < gpu_time(y);
        const double dx = std::abs(x.param_delta_fraction);
        const double dy = std::abs(y.param_delta_fraction);
        if (dx != dy) return dx < dy;
        const double cx = closeness(x.config, cfg);
        const double cy = closeness(y.config, cfg);
        if (cx != cy) return cx < cy;
        return lex_key(x.config) < lex_key(y.config);
    });

    std::vector<Candidate> ranked = std::move(top);
    ranked.insert(ranked.end(), std::make_move_iterator(rest.begin()),
                  std::make_move_iterator(rest.end()));
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = static_cast<int>(i);
    return ranked;
}

} // namespace gemmlint
