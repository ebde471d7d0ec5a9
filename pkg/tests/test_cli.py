"""End-to-end CLI behavior via subprocesses.

Exit code contract: 0 pass, 1 property violated, 2 inconclusive or
refused, 3 usage or runtime error.  Machine output is one JSON document
on stdout; diagnostics go to stderr.
"""

import json

import numpy as np
import pytest

from cevarep.fracaffine import FracAffineMap, random_fracaffine

from conftest import cli_json, run_cli

PARABOLA_SRC = (
    "n = 2\nm = 2\nregion = [-1, 1] x [-1, 1]\n"
    "f1 := x1\nf2 := x2 + x1^2\n"
)
AFFINE_SRC = (
    "n = 2\nm = 2\nregion = [-1, 1] x [-1, 1]\n"
    "f1 := 0.5*x1 + 0.25*x2 + 0.1\nf2 := x1 - x2\n"
)
MOEBIUS_SRC = (
    "n = 2\nm = 2\nregion = [-1, 1] x [-1, 1]\n"
    "f1 := (2*x1 + 1) / (0.2*x2 + 2)\nf2 := x2 / (0.2*x2 + 2)\n"
)


def test_gen_eval_round_trip(tmp_path):
    path = tmp_path / "map.json"
    doc = cli_json(["gen", "-n", "2", "-m", "2", "--seed", "4",
                    "--out", str(path)])
    assert doc["tool_version"]
    assert doc["seed"] == 4
    f = FracAffineMap.from_json(path.read_text())
    truth = random_fracaffine(2, 2, rng_seed=4)
    assert np.allclose(f.top.matrix, truth.top.matrix, rtol=0, atol=0)
    image = cli_json(["eval", "--map", str(path), "--at", "0.1,-0.2"])
    assert np.allclose(image, truth.eval([0.1, -0.2]), rtol=1e-15)


def test_gen_deterministic_bytes():
    runs = [run_cli(["gen", "--seed", "9"]) for _ in range(2)]
    assert runs[0][0] == runs[1][0] == 0
    assert runs[0][1] == runs[1][1]


def test_gen_rejects_bad_dimension():
    code, _, err = run_cli(["gen", "-n", "0"])
    assert code == 3
    assert "error" in err


def test_eval_error_paths(tmp_path):
    path = tmp_path / "map.json"
    cli_json(["gen", "--seed", "0", "--spread", "0.4", "--out", str(path)])
    f = FracAffineMap.from_json(path.read_text())
    B = f.bottom.row
    bad = -2.0 * B / float(B @ B)  # denominator 1 - 2 = -1 there
    at = ",".join(repr(float(v)) for v in bad)
    doc = cli_json(["eval", "--map", str(path), "--at", at],
                   expect_code=3)
    assert doc["error"] == "OutOfDomain"
    assert set(doc) == {"tool_version", "error", "message"}
    code, _, _ = run_cli(["eval", "--map", str(tmp_path / "nope.json"),
                          "--at", "0,0"])
    assert code == 3


def test_certify_pass_on_generated_map(tmp_path):
    path = tmp_path / "map.json"
    cli_json(["gen", "--seed", "3", "--out", str(path)])
    doc = cli_json(["certify", "--map", str(path), "--trials", "300"])
    assert doc["command"] == "certify"
    assert doc["report"]["verdict"] == "pass"
    assert doc["report"]["violations"] == 0
    assert doc["trials"] == 300


def test_certify_violated_exit_code():
    code, out, _ = run_cli(["certify", "--src", PARABOLA_SRC,
                            "--trials", "200"])
    assert code == 1
    doc = json.loads(out.decode())
    assert doc["report"]["verdict"] == "violated"
    assert doc["report"]["witnesses"]


def test_certify_inconclusive_exit_code():
    src = "n = 1\nm = 1\nregion = [0, 0]\nf1 := x1\n"
    code, out, _ = run_cli(["certify", "--src", src, "--trials", "50"])
    assert code == 2
    assert json.loads(out.decode())["report"]["verdict"] == "inconclusive"


def test_certify_deterministic_bytes():
    args = ["certify", "--src", MOEBIUS_SRC, "--trials", "100", "--seed", "5"]
    runs = [run_cli(args) for _ in range(2)]
    assert runs[0][0] == runs[1][0] == 0
    assert runs[0][1] == runs[1][1]


def test_extract_recovers_generated_map(tmp_path):
    path = tmp_path / "map.json"
    cli_json(["gen", "--seed", "11", "--out", str(path)])
    doc = cli_json(["extract", "--map", str(path)])
    truth = FracAffineMap.from_json(path.read_text())
    recovered = FracAffineMap.from_json_dict(doc["result"]["map"])
    rng = np.random.default_rng(0)
    X = rng.uniform(-0.4, 0.4, size=(10, 2))
    worst = 0.0
    for x in X:
        fx = truth.eval(x)
        gx = recovered.eval(x)
        worst = max(worst, float(np.linalg.norm(gx - fx))
                    / max(1.0, float(np.linalg.norm(fx))))
    assert worst <= 1e-7
    assert doc["result"]["validation_sup_error"] <= 1e-7


def test_extract_affine_source_has_flat_denominator():
    doc = cli_json(["extract", "--src", AFFINE_SRC])
    B = np.array(doc["result"]["map"]["B"], dtype=float)
    assert float(np.linalg.norm(B)) <= 1e-8
    assert doc["result"]["map"]["b"] == pytest.approx(1.0, abs=1e-8)


def test_extract_refusal_exit_code():
    src = "n = 1\nm = 2\nregion = [-1, 1]\nf1 := x1\nf2 := 2*x1\n"
    doc = cli_json(["extract", "--src", src], expect_code=2)
    assert doc["error"] == "CollinearRange"


def test_extract_bent_oracle_refused():
    doc = cli_json(["extract", "--src", PARABOLA_SRC], expect_code=2)
    assert doc["error"] == "NotOnOpenSegment"


def test_source_flags_mutually_exclusive(tmp_path):
    path = tmp_path / "map.json"
    cli_json(["gen", "--out", str(path)])
    code, _, _ = run_cli(["certify", "--map", str(path),
                          "--src", AFFINE_SRC])
    assert code == 3
    code, _, _ = run_cli(["certify"])
    assert code == 3


def test_config_file_with_flag_override(tmp_path):
    map_path = tmp_path / "map.json"
    cli_json(["gen", "--seed", "2", "--out", str(map_path)])
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "map_path": str(map_path), "trials": 150, "seed": 5,
    }))
    doc = cli_json(["certify", "--config", str(cfg_path)])
    assert doc["trials"] == 150
    assert doc["seed"] == 5
    doc2 = cli_json(["certify", "--config", str(cfg_path), "--seed", "7"])
    assert doc2["seed"] == 7


def test_region_flag(tmp_path):
    path = tmp_path / "map.json"
    cli_json(["gen", "--seed", "6", "--out", str(path)])
    doc = cli_json(["certify", "--map", str(path),
                    "--region", "-0.2:0.2,-0.2:0.2", "--trials", "100"])
    assert doc["report"]["verdict"] == "pass"
    code, _, _ = run_cli(["certify", "--src", AFFINE_SRC,
                          "--region", "-1:1"])  # dim mismatch
    assert code == 3
    code, _, _ = run_cli(["certify", "--src", AFFINE_SRC,
                          "--region", "banana"])
    assert code == 3


def test_ceva_concurrent():
    doc = cli_json(["ceva", "--vertices", "0,0;1,0;0,1",
                    "--weights", "1,1,1,1,1,1"])
    assert doc["verdict"] == "concurrent"
    assert np.allclose(doc["point"], [1.0 / 3.0, 1.0 / 3.0], atol=1e-12)
    assert doc["crosscheck_distance"] <= 1e-10


def test_ceva_violated():
    code, out, _ = run_cli(["ceva", "--vertices", "0,0;1,0;0,1",
                            "--weights", "2,1,1,1,1,1"])
    assert code == 1
    assert json.loads(out.decode())["verdict"] == "violated"


def test_ceva_usage_errors():
    code, _, _ = run_cli(["ceva", "--vertices", "0,0;1,0",
                          "--weights", "1,1,1,1,1,1"])
    assert code == 3
    code, _, _ = run_cli(["ceva", "--vertices", "0,0;1,0;0,1",
                          "--weights", "1,1"])
    assert code == 3


def test_threads_env_validated():
    code, _, err = run_cli(["gen"], env_extra={"CEVAREP_THREADS": "banana"})
    assert code == 3
    assert "CEVAREP_THREADS" in err
    code, _, _ = run_cli(["gen"], env_extra={"CEVAREP_THREADS": "0"})
    assert code == 3
    code, _, _ = run_cli(["gen"], env_extra={"CEVAREP_THREADS": "4"})
    assert code == 0


def test_out_file_matches_stdout(tmp_path):
    out_path = tmp_path / "report.json"
    code, stdout, _ = run_cli(["certify", "--src", MOEBIUS_SRC,
                               "--trials", "100", "--out", str(out_path)])
    assert code == 0
    assert out_path.read_bytes() == stdout


def test_stdout_is_single_json_document():
    _, stdout, _ = run_cli(["certify", "--src", MOEBIUS_SRC,
                            "--trials", "50"])
    json.loads(stdout.decode())  # raises if anything extra is printed


def test_version_and_usage():
    code, out, err = run_cli(["--version"])
    assert code == 0
    assert b"cevarep" in out or "cevarep" in err
    code, _, _ = run_cli(["frobnicate"])
    assert code == 3
    code, _, _ = run_cli([])
    assert code == 3
