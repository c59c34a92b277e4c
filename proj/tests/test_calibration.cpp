// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gemmlint/calibration.hpp"

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

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

} // namespace

TEST_CASE("bench plans cover the decomposition and deduplicate") {
    const auto rows = emit_bench_plan(gpt3_2p7b(), kA100);
    REQUIRE(!rows.empty());

    // the attention score BMM shows up with its batched shape
    const bool has_score = std::any_of(rows.begin(), rows.end(), [](const PlanRow& r) {
        return r.batch == 128 && r.m == 2048 && r.k == 80 && r.n == 2048;
    });
    CHECK(has_score);

    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            const bool same = rows[i].gpu == rows[j].gpu && rows[i].dtype == rows[j].dtype &&
                              rows[i].batch == rows[j].batch && rows[i].m == rows[j].m &&
                              rows[i].k == rows[j].k && rows[i].n == rows[j].n;
            CHECK_FALSE(same);
        }
    }
}

TEST_CASE("swiglu up and gate collapse to one plan row") {
    TransformerConfig cfg = gpt3_2p7b();
    cfg.activation = Activation::Swiglu;
    cfg.d_ff = 10240;
    const auto plain_rows = emit_bench_plan(gpt3_2p7b(), kA100);
    const auto swiglu_rows = emit_bench_plan(cfg, kA100);
    CHECK(swiglu_rows.size() == plain_rows.size()); // gate deduplicated against up
}

TEST_CASE("sweep plans enumerate the grid") {
    TransformerConfig base = gpt3_2p7b();
    base.a = 40;

    SweepSpec sweep;
    sweep.field = "h";
    sweep.lo = 1024;
    sweep.hi = 16384;
    sweep.step = 64;
    sweep.roles = {GemmRole::MlpUp};
    sweep.fixed_head_dim = 64;

    const auto rows = emit_bench_plan(base, sweep, kA100);
    CHECK(rows.size() == 241);

    SweepSpec empty = sweep;
    empty.lo = 2048;
    empty.hi = 1024;
    CHECK(emit_bench_plan(base, empty, kA100).empty());
}

TEST_CASE("ingest round-trips an emitted plan") {
    const auto rows = emit_bench_plan(gpt3_2p7b(), kA100);
    std::ostringstream csv;
    csv << "gpu,dtype,batch,m,k,n,tflops,repeats\n";
    double fake = 100.0;
    for (const PlanRow& row : rows) {
        csv << row.gpu << "," << row.dtype << "," << row.batch << "," << row.m << "," << row.k
            << "," << row.n << "," << fake << ",3\n";
        fake += 7.25;
    }
    const std::string path = write_temp("gl_meas.csv", csv.str());
    const IngestResult result = ingest_measurements(path);
    CHECK(result.rows_loaded == rows.size());
    CHECK(result.rows_skipped == 0);

    double expected = 100.0;
    for (const PlanRow& row : rows) {
        GemmShape shape{row.m, row.k, row.n, row.batch, row.dtype};
        const auto hit = result.table.lookup(row.gpu, shape);
        REQUIRE(hit.has_value());
        CHECK(*hit == expected); // bit-exact
        expected += 7.25;
    }
}

TEST_CASE("duplicate keys keep the higher repeat count, last wins ties") {
    const std::string path = write_temp("gl_dup.csv",
                                        "gpu,dtype,batch,m,k,n,tflops,repeats\n"
                                        "A100,fp16,1,128,128,128,50,3\n"
                                        "A100,fp16,1,128,128,128,90,10\n"
                                        "A100,fp16,1,128,128,128,70,4\n"
                                        "A100,fp16,1,256,256,256,10,2\n"
                                        "A100,fp16,1,256,256,256,20,2\n");
    const IngestResult result = ingest_measurements(path);
    CHECK(result.table.size() == 2);
    CHECK(*result.table.lookup("A100", {128, 128, 128, 1, "fp16"}) == 90.0);
    CHECK(*result.table.lookup("A100", {256, 256, 256, 1, "fp16"}) == 20.0);
}

TEST_CASE("malformed rows are skipped and reported by number") {
    const std::string path = write_temp("gl_badrows.csv",
                                        "gpu,dtype,batch,m,k,n,tflops,repeats\n"
                                        "A100,fp16,1,128,128,128,50,3\n"
                                        "A100,fp16,1,128,128,256,-4,3\n"  // bad tflops
                                        "A100,fp16,1,128,128\n"           // short row
                                        "A100,fp16,1,x,128,128,50,3\n"    // bad int
                                        "A100,fp16,1,512,128,128,44,3\n");
    const IngestResult result = ingest_measurements(path);
    CHECK(result.rows_loaded == 2);
    CHECK(result.rows_skipped == 3);
    REQUIRE(result.messages.size() == 3);
    CHECK(result.messages[0].find("row 3 skipped") != std::string::npos);
    CHECK(result.messages[1].find("row 4 skipped") != std::string::npos);
    CHECK(result.messages[2].find("row 5 skipped") != std::string::npos);
}

TEST_CASE("a bad header is a schema violation") {
    const std::string path = write_temp("gl_badheader.csv",
                                        "gpu,dtype,m,k,n,tflops\n"
                                        "A100,fp16,128,128,128,50\n");
    CHECK_THROWS_AS((void)ingest_measurements(path), ParseError);
}

TEST_CASE("calibrated estimates return stored values exactly") {
    CalibrationTable table;
    table.insert({"A100", "fp16", 1, 4096, 4096, 4096, 123.456, 5});
    const GemmShape g{4096, 4096, 4096, 1, "fp16"};
    const auto est = estimate_throughput(g, kA100, &table);
    CHECK(est.calibrated);
    CHECK(est.tflops == 123.456);

    // a different shape misses under exact-only policy
    const GemmShape other{4096, 4096, 4097, 1, "fp16"};
    CHECK_FALSE(estimate_throughput(other, kA100, &table).calibrated);
}

TEST_CASE("nearest-log-shape interpolation returns a stored value") {
    CalibrationTable table(InterpolationPolicy::NearestLogShape);
    table.insert({"A100", "fp16", 1, 1024, 1024, 1024, 111.0, 1});
    table.insert({"A100", "fp16", 1, 8192, 8192, 8192, 222.0, 1});

    CHECK(*table.lookup("A100", {1000, 1100, 1024, 1, "fp16"}) == 111.0);
    CHECK(*table.lookup("A100", {9000, 8000, 8192, 1, "fp16"}) == 222.0);
    // never crosses dtype boundaries
    CHECK_FALSE(table.lookup("A100", {1024, 1024, 1024, 1, "fp32"}).has_value());
    CHECK_FALSE(table.lookup("V100", {1024, 1024, 1024, 1, "fp16"}).has_value());
}

TEST_CASE("run_sweep and export_sweep") {
    TransformerConfig base = gpt3_2p7b();
    base.a = 40;

    SweepSpec sweep;
    sweep.field = "h";
    sweep.lo = 2048;
    sweep.hi = 4096;
    sweep.step = 1024;
    sweep.fixed_head_dim = 64;

    const auto rows = run_sweep(base, sweep, kA100);
    REQUIRE(!rows.empty());
    // one row per (h, role): 3 points x 7 roles (logit included)
    CHECK(rows.size() == 3 * 7);

    SUBCASE("export then re-read is the identity") {
        std::ostringstream out;
        export_sweep("h", rows, out);
        std::istringstream in(out.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "h,role,predicted_tflops,predicted_latency_us,wave_efficiency,aligned");
        for (const SweepRow& row : rows) {
            REQUIRE(std::getline(in, line));
            std::stringstream fields(line);
            std::string x, role, tflops, latency, eff, aligned;
            std::getline(fields, x, ',');
            std::getline(fields, role, ',');
            std::getline(fields, tflops, ',');
            std::getline(fields, latency, ',');
            std::getline(fields, eff, ',');
            std::getline(fields, aligned, ',');
            CHECK(std::stoll(x) == row.x);
            CHECK(role == role_name(row.role));
            CHECK(std::stod(tflops) == row.analysis.predicted_tflops);
            CHECK(std::stod(latency) == row.analysis.predicted_latency_us);
            CHECK(std::stod(eff) == row.analysis.waves.wave_efficiency);
            CHECK((aligned == "true") == row.analysis.alignment.all_aligned());
        }
        CHECK_FALSE(std::getline(in, line));
    }

    SUBCASE("empty results refuse to export") {
        std::ostringstream out;
        CHECK_THROWS_AS(export_sweep("h", {}, out), std::invalid_argument);
    }

    SUBCASE("single point produces one row per role") {
        SweepSpec point = sweep;
        point.hi = point.lo;
        CHECK(run_sweep(base, point, kA100).size() == 7);
    }
}

TEST_CASE("measurement csv writer round-trips through ingest") {
    CalibrationTable table;
    table.insert({"A100", "fp16", 4, 128, 80, 2048, 55.125, 7});
    table.insert({"V100", "fp32", 1, 512, 512, 512, 9.875, 2});

    std::ostringstream out;
    write_measurements_csv(table.records(), out);
    std::istringstream in(out.str());
    const IngestResult result = ingest_measurements_text(in, "roundtrip");
    CHECK(result.rows_loaded == 2);
    CHECK(*result.table.lookup("A100", {128, 80, 2048, 4, "fp16"}) == 55.125);
    CHECK(*result.table.lookup("V100", {512, 512, 512, 1, "fp32"}) == 9.875);
}
