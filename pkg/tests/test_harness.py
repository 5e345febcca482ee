"""Serialization round-trips, pipeline determinism, verification, and the
CLI exit-code contract."""

import json
import subprocess
import sys

import pytest

from sparsehard.errors import ParameterError
from sparsehard.harness import (
    ExperimentConfig,
    run_pipeline,
    solve_sparse_file,
    verify_label_cover,
    verify_report_payload,
    verify_sparse_instance,
)
from sparsehard.label_cover import Max3SatFormula, generate, multilayer, random_max3sat
from sparsehard.reduction import reduce_two_layered
from sparsehard.serialize import dumps, from_payload, load_file, save_file, to_payload


def unique_config(**overrides):
    # smallest oracle-feasible lift: k = 4 over 24 columns
    base = dict(
        reduction="unique",
        source_kind="planted-satisfiable-unique",
        source_params={"n_left": 1, "n_right": 1, "R": 2, "degree": 1},
        seed=5,
        ell=4,
        epsilon_target=0.8,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ------------------------------------------------------------- serialization


def test_round_trip_formula(tmp_path):
    f = random_max3sat(6, seed=2)
    path = tmp_path / "formula.json"
    save_file(f, path)
    assert load_file(path) == f


def test_round_trip_label_cover(tmp_path):
    inst = generate(
        "planted-satisfiable-projection",
        {"n_left": 3, "n_right": 3, "sigma_v": 3, "sigma_w": 2, "degree": 2},
        7,
    )
    path = tmp_path / "instance.json"
    save_file(inst, path)
    assert load_file(path) == inst


def test_round_trip_multilayered(tmp_path):
    inst = multilayer(
        generate("anti-satisfiable-unique-gadget", {"R": 2, "copies": 1}, 0), 4
    )
    path = tmp_path / "lifted.json"
    save_file(inst, path)
    assert load_file(path) == inst


def test_round_trip_sparse_instance(tmp_path):
    base = generate(
        "planted-satisfiable-unique", {"n_left": 2, "n_right": 2, "R": 2, "degree": 2}, 3
    )
    sparse = reduce_two_layered(base)
    path = tmp_path / "sparse.json"
    save_file(sparse, path)
    loaded = load_file(path)
    assert loaded == sparse
    assert loaded.column_index == sparse.column_index


def test_payload_rejects_unknown_version():
    with pytest.raises(ParameterError):
        from_payload({"format_version": 99, "type": "max3sat"})
    with pytest.raises(ParameterError):
        from_payload({"format_version": 1, "type": "mystery"})


def test_save_is_byte_deterministic(tmp_path):
    inst = generate(
        "planted-satisfiable-unique", {"n_left": 3, "n_right": 3, "R": 2, "degree": 2}, 7
    )
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_file(inst, a)
    save_file(inst, b)
    assert a.read_bytes() == b.read_bytes()


# ----------------------------------------------------------------- pipeline


def test_pipeline_deterministic_reports():
    config = unique_config()
    _, _, first = run_pipeline(config)
    _, _, second = run_pipeline(config)
    assert dumps(first.to_payload()) == dumps(second.to_payload())
    assert first.all_checks_pass


def test_pipeline_completeness_and_exponent_checks():
    _, sparse, report = run_pipeline(unique_config())
    assert report.completeness_residual < 1e-10
    assert report.oracle_residual < 1e-10
    assert ("completeness_residual_zero", True) in report.checks
    assert report.exponent == pytest.approx(
        __import__("math").log(sparse.k) / __import__("math").log(4)
    )


def test_pipeline_soundness_check_on_gadget():
    config = ExperimentConfig(
        reduction="two_layered",
        source_kind="anti-satisfiable-unique-gadget",
        source_params={"R": 2, "copies": 1},
        seed=0,
    )
    _, _, report = run_pipeline(config)
    assert ("soundness_gap_positive", True) in report.checks
    assert report.oracle_residual > 1e-6


def test_pipeline_from_max3sat_source():
    config = ExperimentConfig(
        reduction="two_layered",
        source_kind="max3sat-random",
        source_params={"n_vars": 3},
        seed=1,
        run_oracle=False,
    )
    base, sparse, report = run_pipeline(config)
    assert base.n_left == 5 and base.n_right == 3
    assert sparse.k == 8
    assert report.oracle_residual is None


def test_config_validation():
    with pytest.raises(ParameterError):
        unique_config(ell=3).validate()
    with pytest.raises(ParameterError):
        unique_config(reduction="bogus").validate()
    with pytest.raises(ParameterError):
        unique_config(solvers=("gradient",)).validate()
    with pytest.raises(ParameterError):
        ExperimentConfig(
            reduction="two_layered",
            source_kind="file",
            source_params={},
            seed=0,
        ).validate()


# ------------------------------------------------------------- verification


def test_verify_label_cover_checks():
    inst = generate(
        "planted-satisfiable-unique", {"n_left": 3, "n_right": 3, "R": 2, "degree": 2}, 2
    )
    checks = verify_label_cover(inst)
    assert all(c.passed for c in checks)


def test_verify_sparse_instance_detects_corruption(tmp_path):
    base = generate(
        "planted-satisfiable-unique", {"n_left": 2, "n_right": 2, "R": 2, "degree": 2}, 3
    )
    sparse = reduce_two_layered(base)
    assert all(c.passed for c in verify_sparse_instance(sparse))
    path = tmp_path / "sparse.json"
    save_file(sparse, path)
    payload = json.loads(path.read_text())
    payload["columns"][0].append(sparse.m_dim - 1)  # stray coordinate
    payload["columns"][0].sort()
    path.write_text(json.dumps(payload))
    corrupted = load_file(path)
    failing = [c for c in verify_sparse_instance(corrupted) if not c.passed]
    assert failing
    assert any(c.detail for c in failing)


def test_verify_report_round_trip(tmp_path):
    config = unique_config()
    _, _, report = run_pipeline(config)
    checks = verify_report_payload(report.to_payload())
    assert all(c.passed for c in checks)


def test_verify_report_from_solved_file(tmp_path):
    base = generate(
        "planted-satisfiable-unique", {"n_left": 2, "n_right": 2, "R": 2, "degree": 2}, 3
    )
    sparse = reduce_two_layered(base)
    path = tmp_path / "sparse.json"
    save_file(sparse, path)
    config = ExperimentConfig(
        reduction="two_layered",
        source_kind="file",
        source_params={"path": str(path)},
        seed=0,
    )
    report = solve_sparse_file(path, config)
    assert all(c.passed for c in verify_report_payload(report.to_payload()))
    # tampering with the file breaks reproducibility
    payload = json.loads(path.read_text())
    payload["k"] = 999
    path.write_text(json.dumps(payload))
    checks = verify_report_payload(report.to_payload())
    assert not all(c.passed for c in checks)


def test_memory_cap_env_variable(monkeypatch):
    base = generate(
        "planted-satisfiable-unique", {"n_left": 2, "n_right": 2, "R": 2, "degree": 2}, 3
    )
    sparse = reduce_two_layered(base)
    monkeypatch.setenv("SPARSEHARD_CAP_MB", "0")
    from sparsehard.errors import BudgetExceededError

    with pytest.raises(BudgetExceededError):
        sparse.to_dense()
    monkeypatch.setenv("SPARSEHARD_CAP_MB", "64")
    assert sparse.to_dense().shape == (sparse.m_dim, sparse.n_cols)


# ------------------------------------------------------------------ CLI


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "sparsehard.cli", *argv],
        capture_output=True,
        text=True,
    )


def test_cli_generate_from_formula_file(tmp_path):
    formula = Max3SatFormula(4, ((1, -2, 3), (-1, 2, 4)))
    formula_path = tmp_path / "formula.json"
    save_file(formula, formula_path)
    inst_path = tmp_path / "game.json"
    result = run_cli(
        "generate", "--formula-file", str(formula_path), "--out", str(inst_path)
    )
    assert result.returncode == 0, result.stderr
    game = load_file(inst_path)
    assert game.n_left == 2 and game.n_right == 4
    assert len(game.edges) == 6
    assert (game.sigma_v_size, game.sigma_w_size) == (7, 2)
    # exactly one of --kind / --formula-file must be given
    assert run_cli("generate").returncode == 1


def test_cli_generate_deterministic_bytes(tmp_path):
    out1 = tmp_path / "one.json"
    out2 = tmp_path / "two.json"
    args = [
        "generate", "--kind", "planted-satisfiable-unique",
        "--param", "n_left=3", "--param", "n_right=3",
        "--param", "R=2", "--param", "degree=2", "--seed", "7",
    ]
    assert run_cli(*args, "--out", str(out1)).returncode == 0
    assert run_cli(*args, "--out", str(out2)).returncode == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_full_pipeline_and_exit_codes(tmp_path):
    inst = tmp_path / "inst.json"
    sparse = tmp_path / "sparse.json"
    report = tmp_path / "report.json"

    gen = run_cli(
        "generate", "--kind", "planted-satisfiable-unique",
        "--param", "n_left=1", "--param", "n_right=1",
        "--param", "R=2", "--param", "degree=1",
        "--seed", "5", "--out", str(inst),
    )
    assert gen.returncode == 0, gen.stderr

    red = run_cli(
        "reduce", "--in", str(inst), "--reduction", "unique",
        "--ell", "4", "--out", str(sparse),
    )
    assert red.returncode == 0, red.stderr
    assert "mu gadget" in red.stdout

    sol = run_cli("solve", "--in", str(sparse), "--out", str(report))
    assert sol.returncode == 0, sol.stderr
    assert "oracle residual" in sol.stdout

    ver = run_cli("verify", "--in", str(report))
    assert ver.returncode == 0, ver.stderr

    ver_sys = run_cli("verify", "--system", "3", "3")
    assert ver_sys.returncode == 0

    bench = run_cli("bench", "--in", str(sparse), "--repeat", "1")
    assert bench.returncode == 0 and "omp" in bench.stdout


def test_cli_validation_error_exit_code(tmp_path):
    inst = tmp_path / "inst.json"
    run_cli(
        "generate", "--kind", "planted-satisfiable-projection",
        "--param", "n_left=2", "--param", "n_right=2",
        "--param", "sigma_v=3", "--param", "sigma_w=5",
        "--seed", "1", "--out", str(inst),
    )
    # d = sigma_w = 5 exceeds ell = 4: validation failure
    result = run_cli("reduce", "--in", str(inst), "--reduction", "smooth", "--ell", "4")
    assert result.returncode == 1
    assert "error" in result.stderr


def test_cli_budget_refusal_exit_code(tmp_path):
    inst = tmp_path / "inst.json"
    sparse = tmp_path / "sparse.json"
    run_cli(
        "generate", "--kind", "planted-satisfiable-unique",
        "--param", "n_left=3", "--param", "n_right=3",
        "--param", "R=2", "--param", "degree=2",
        "--seed", "5", "--out", str(inst),
    )
    run_cli("reduce", "--in", str(inst), "--reduction", "unique", "--ell", "4", "--out", str(sparse))
    result = run_cli("solve", "--in", str(sparse), "--cap-supports", "10")
    assert result.returncode == 2
    assert "budget refusal" in result.stderr


def test_cli_property_failure_exit_code(tmp_path):
    base = generate(
        "planted-satisfiable-unique", {"n_left": 2, "n_right": 2, "R": 2, "degree": 2}, 3
    )
    sparse = reduce_two_layered(base)
    path = tmp_path / "sparse.json"
    save_file(sparse, path)
    payload = json.loads(path.read_text())
    payload["columns"][0].append(sparse.m_dim - 1)
    payload["columns"][0] = sorted(set(payload["columns"][0]))
    path.write_text(json.dumps(payload))
    result = run_cli("verify", "--in", str(path))
    assert result.returncode == 3
    assert "FAIL" in result.stdout
