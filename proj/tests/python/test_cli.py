# Copyright (c) 2026, the gemmlint authors
# SPDX-License-Identifier: Apache-2.0
"""CLI smoke tests: exit codes and output plumbing.

Usage: python3 test_cli.py /path/to/gemmlint
"""

import os
import subprocess
import sys
import tempfile

CLI = os.environ.get("GEMMLINT_CLI", "")

GPT3_FLAGS = ["--h", "2560", "--a", "32", "--b", "4", "--s", "2048",
              "--t", "1", "--L", "32", "--v", "50304"]


def run(*args, **kwargs):
    return subprocess.run([CLI, *args], capture_output=True, text=True, **kwargs)


def test_lint_exit_codes():
    # the 2560/32 head dimension warns -> exit 1
    result = run("lint", "--gpu", "A100", *GPT3_FLAGS)
    assert result.returncode == 1, result.stderr
    assert "R3" in result.stdout
    assert "80" in result.stdout

    # non-integral h/a -> exit 2
    result = run("lint", "--gpu", "A100", "--h", "2560", "--a", "48",
                 "--b", "4", "--s", "2048", "--v", "50304")
    assert result.returncode == 2

    # a clean config passes -> exit 0
    result = run("lint", "--gpu", "A100", "--h", "2560", "--a", "40",
                 "--b", "4", "--s", "2048", "--L", "32", "--v", "50304")
    assert result.returncode == 0, result.stdout + result.stderr
    assert "pass" in result.stdout


def test_wave_reports_the_divisible_square():
    result = run("wave", "--m", "13824", "--n", "13824",
                 "--tile", "128x256", "--sms", "108")
    assert result.returncode == 0, result.stderr
    lines = {line.split()[0]: line.split()[1]
             for line in result.stdout.splitlines() if len(line.split()) >= 2}
    assert lines["wave_count"] == "54"
    assert lines["tail_blocks"] == "0"
    assert lines["wave_free_either_orientation"] == "true"


def test_params_unit_scale():
    result = run("params", "--h", "1", "--L", "1", "--v", "1", "--s", "1")
    assert result.returncode == 0, result.stderr
    rows = dict(line.split()[:2] for line in result.stdout.splitlines()
                if len(line.split()) >= 2)
    assert rows["exact"] == "27"


def test_explain_and_usage_errors():
    result = run("explain", "R9")
    assert result.returncode == 0
    assert "wave" in result.stdout

    result = run("explain", "R99")
    assert result.returncode == 2
    assert "unknown rule" in result.stderr

    result = run("no-such-command")
    assert result.returncode == 64

    result = run()  # a subcommand is required
    assert result.returncode == 64

    result = run("--help")
    assert result.returncode == 0


def test_bench_plan_and_ingest_roundtrip():
    plan = run("bench-plan", "--gpu", "A100", *GPT3_FLAGS)
    assert plan.returncode == 0, plan.stderr
    lines = plan.stdout.strip().splitlines()
    assert lines[0] == "gpu,dtype,batch,m,k,n"
    assert any(line == "A100,fp16,128,2048,80,2048" for line in lines[1:])

    with tempfile.TemporaryDirectory() as tmp:
        measured = os.path.join(tmp, "measured.csv")
        with open(measured, "w") as out:
            out.write("gpu,dtype,batch,m,k,n,tflops,repeats\n")
            for i, line in enumerate(lines[1:]):
                out.write(f"{line},{100 + i},3\n")
        result = run("ingest", measured)
        assert result.returncode == 0, result.stderr
        assert f"loaded {len(lines) - 1} measurement(s), skipped 0" in result.stdout

        # calibrated decompose runs with the table supplied
        result = run("decompose", "--gpu", "A100", "--calibration", measured, *GPT3_FLAGS)
        assert result.returncode == 0, result.stderr


def test_sweep_emits_csv():
    result = run("sweep", "--gpu", "A100", *GPT3_FLAGS,
                 "--sweep", "h:2048:4096:1024", "--fix-head-dim", "64",
                 "--roles", "mlp_up")
    assert result.returncode == 0, result.stderr
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "h,role,predicted_tflops,predicted_latency_us,wave_efficiency,aligned"
    assert len(lines) == 1 + 3  # three sweep points, one role

    # a sweep that crosses a divisibility boundary is an error, not silence
    result = run("sweep", "--gpu", "A100", *GPT3_FLAGS,
                 "--sweep", "h:1000:1010:1", "--fix-head-dim", "64")
    assert result.returncode == 2
    assert "head dimension" in result.stderr


def test_suggest_table():
    result = run("suggest", "--gpu", "A100", *GPT3_FLAGS, "--vary", "a")
    assert result.returncode == 0, result.stderr
    first_data_row = result.stdout.splitlines()[1].split()
    assert first_data_row[0] == "0"   # rank
    assert first_data_row[1] == "40"  # the published head-count fix


def test_structured_text_format():
    result = run("lint", "--gpu", "A100", "--format", "structured-text", *GPT3_FLAGS)
    assert result.returncode == 1
    assert "diagnostic.0.rule = R3" in result.stdout
    assert "summary.pass = false" in result.stdout


def test_gpu_spec_file_and_env_dir():
    with tempfile.TemporaryDirectory() as tmp:
        spec = os.path.join(tmp, "Custom.gpu")
        with open(spec, "w") as out:
            out.write("name = Custom\nsm_count = 64\ntc_alignment_bytes = 128\n"
                      "mem_bandwidth_gbps = 1000\npeak_tflops.fp16 = 200\n")
        result = run("wave", "--m", "8192", "--n", "8192", "--gpu", spec)
        assert result.returncode == 0, result.stderr

        env = dict(os.environ, GEMMLINT_GPU_DIR=tmp)
        result = subprocess.run([CLI, "wave", "--m", "8192", "--n", "8192",
                                 "--gpu", "Custom"],
                                capture_output=True, text=True, env=env)
        assert result.returncode == 0, result.stderr


def test_identical_invocations_are_byte_identical():
    first = run("decompose", "--gpu", "A100", *GPT3_FLAGS)
    second = run("decompose", "--gpu", "A100", *GPT3_FLAGS)
    assert first.stdout == second.stdout


def main():
    global CLI
    if len(sys.argv) > 1:
        CLI = sys.argv[1]
    if not CLI:
        print("usage: test_cli.py /path/to/gemmlint", file=sys.stderr)
        return 2
    tests = [v for k, v in sorted(globals().items())
             if k.startswith("test_") and callable(v)]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} CLI smoke test(s) passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
