// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "gemmlint/optimizer.hpp"

using namespace gemmlint;

namespace {

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

} // namespace

TEST_CASE("pad_vocab rounds up to the next multiple of 64") {
    CHECK(pad_vocab(50257) == 50304);
    CHECK(pad_vocab(64) == 64);
    CHECK(pad_vocab(1) == 64);
    CHECK(pad_vocab(65) == 128);
    CHECK_THROWS_AS((void)pad_vocab(0), std::invalid_argument);
}

TEST_CASE("fix_heads enumerates compliant head counts by distance") {
    SUBCASE("2560/32 yields the full ladder, 40 first") {
        const std::vector<std::int64_t> expected = {40, 20, 10, 8, 5, 4, 2, 1};
        CHECK(fix_heads(2560, 32) == expected);
    }
    SUBCASE("4096/32 keeps 32 itself (h/a = 128)") {
        const auto heads = fix_heads(4096, 32);
        CHECK(std::find(heads.begin(), heads.end(), 32) != heads.end());
        CHECK(heads.front() == 32);
    }
    SUBCASE("h without a factor of 64 has no fixes") {
        CHECK(fix_heads(2576, 32).empty());
    }
}

TEST_CASE("swiglu_dff_search") {
    TransformerConfig context;
    context.h = 4096;
    context.b = 4;
    context.s = 2048;
    context.t = 1;

    SUBCASE("11008 lands in the alignment-compliant top group at h = 4096") {
        const auto results = swiglu_dff_search(4096, 8.0 / 3.0, 512, kA100, context);
        REQUIRE(!results.empty());
        // compliant candidates first, then everything else
        bool seen_noncompliant = false;
        bool found_11008 = false;
        for (const DffCandidate& cand : results) {
            if (cand.pow2_divisor < 64) seen_noncompliant = true;
            if (cand.d_ff == 11008) {
                found_11008 = true;
                CHECK(cand.pow2_divisor >= 64);
                CHECK_FALSE(seen_noncompliant); // still inside the top group
            }
        }
        CHECK(found_11008);
    }
    SUBCASE("the raw 8h/3 value rounds to 10923 and is flagged unaligned") {
        const auto results = swiglu_dff_search(4096, 8.0 / 3.0, 512, kA100, context);
        const auto it = std::find_if(results.begin(), results.end(),
                                     [](const DffCandidate& c) { return c.d_ff == 10923; });
        REQUIRE(it != results.end());
        CHECK(it->pow2_divisor == 1);
    }
    SUBCASE("window 0 at h = 8192, ratio 3.5 hits 28672 exactly") {
        TransformerConfig wide = context;
        wide.h = 8192;
        const auto results = swiglu_dff_search(8192, 3.5, 0, kA100, wide);
        REQUIRE(results.size() == 1);
        CHECK(results[0].d_ff == 28672);
        CHECK(results[0].pow2_divisor >= 64);
    }
    SUBCASE("results respect the window and the tensor-parallel degree") {
        TransformerConfig parallel = context;
        parallel.t = 4;
        const auto results = swiglu_dff_search(4096, 8.0 / 3.0, 128, kA100, parallel);
        const std::int64_t target = 10923;
        for (const DffCandidate& cand : results) {
            CHECK(cand.d_ff >= target - 128);
            CHECK(cand.d_ff <= target + 128);
            CHECK(cand.d_ff % 4 == 0);
        }
    }
}

TEST_CASE("suggest recovers the classic 2.7B head-count fix") {
    SearchSpace space;
    space.vary = {VaryField::A};
    const auto candidates = suggest(gpt3_2p7b(), kA100, space);
    REQUIRE(!candidates.empty());

    SUBCASE("a = 40 ranks first") {
        CHECK(candidates.front().config.a == 40);
        CHECK(candidates.front().report.warns == 0);
        CHECK(candidates.front().param_delta_fraction == 0.0);
    }
    SUBCASE("a = 20 appears among the candidates") {
        const bool found = std::any_of(candidates.begin(), candidates.end(),
                                       [](const Candidate& c) { return c.config.a == 20; });
        CHECK(found);
    }
    SUBCASE("every candidate re-lints without errors and fits the budget") {
        for (const Candidate& c : candidates) {
            CHECK(c.report.errors == 0);
            CHECK(std::abs(c.param_delta_fraction) <= space.budget_tolerance);
        }
    }
    SUBCASE("ranks are assigned in order") {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            CHECK(candidates[i].rank == static_cast<int>(i));
        }
    }
}

TEST_CASE("suggest keeps an already-optimal baseline on top") {
    TransformerConfig good = gpt3_2p7b();
    good.a = 40;
    SearchSpace space;
    space.vary = {VaryField::A};
    const auto candidates = suggest(good, kA100, space);
    REQUIRE(!candidates.empty());
    CHECK(candidates.front().is_baseline);
    CHECK(candidates.front().config.a == 40);
}

TEST_CASE("suggest is deterministic across invocations") {
    SearchSpace space;
    space.vary = {VaryField::A, VaryField::V};
    TransformerConfig cfg = gpt3_2p7b();
    cfg.v = 50257;
    const auto first = suggest(cfg, kA100, space);
    const auto second = suggest(cfg, kA100, space);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].config.a == second[i].config.a);
        CHECK(first[i].config.v == second[i].config.v);
        CHECK(first[i].predicted_layer_latency_us == second[i].predicted_layer_latency_us);
        CHECK(first[i].rank == second[i].rank);
    }
}

TEST_CASE("suggest reports an empty outcome when nothing survives") {
    // h = 100 has no divisor structure to fix and violates the budget on
    // every move; varying a alone cannot help since no divisor of 100
    // makes h/a a multiple of 64 with zero errors... a=1..100 decompose,
    // so instead use a budget of zero with a config whose only candidates
    // change the parameter count.
    TransformerConfig cfg = gpt3_2p7b();
    cfg.v = 50257;
    SearchSpace space;
    space.vary = {VaryField::V};
    space.budget_tolerance = 0.0; // padding v changes params, baseline stays
    const auto candidates = suggest(cfg, kA100, space);
    REQUIRE(candidates.size() == 1); // only the baseline fits a zero budget
    CHECK(candidates.front().is_baseline);
}

TEST_CASE("suggest can search tensor-parallel degrees") {
    TransformerConfig cfg = gpt3_2p7b();
    cfg.a = 40;
    SearchSpace space;
    space.vary = {VaryField::T};
    const auto candidates = suggest(cfg, kA100, space);
    REQUIRE(!candidates.empty());
    for (const Candidate& c : candidates) {
        CHECK(cfg.h % c.config.t == 0);
        CHECK((cfg.b * c.config.a) % c.config.t == 0);
    }
    // splitting across more GPUs is not "faster": candidates compare by
    // GPU-time per replica, so the small-t baseline keeps the top spot
    CHECK(candidates.front().config.t == 1);
}
