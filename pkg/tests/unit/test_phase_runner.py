"""End-to-end phase runs over the shipped run configs."""

import pytest

from fdtlab.app.infra.errors import DeltaTooLarge, ValidationError
from fdtlab.app.infra.jsonio import read_json
from fdtlab.app.models.loader import load_run_config, run_config_from_dict
from fdtlab.app.phase.runner import EXIT_FAIL, EXIT_PASS, prepare_run, run_suite
from fdtlab.app.phase.steps.checks import select_checks

REPRODUCIBLE = {"runtime": {"reproducible": True}}


@pytest.fixture
def run(runs_dir, repo_root, tmp_path):
    def execute(name, **kwargs):
        config = load_run_config(runs_dir / name)
        return run_suite(config, root=repo_root, out_dir=tmp_path / name, **kwargs)
    return execute


def test_two_state_passes(run, tmp_path):
    outcome = run("two_state.json")
    assert outcome.exit_code == EXIT_PASS, outcome.report.failures[:5]
    checks = {r.check for r in outcome.report}
    assert {"fdt_check", "static_identity", "lemma_numerical", "green_kubo"} <= checks
    assert outcome.outputs["csv"].exists()
    data = read_json(outcome.outputs["json"])
    assert data["summary"]["all_passed"] is True
    assert data["family"] == "TimeChange"
    assert "timestamp" in data
    log = read_json(outcome.runlog)
    assert log["run_id"] == outcome.run_id
    assert outcome.runlog.parent == tmp_path / "two_state.json" / "runs"


def test_run_config_seed_reaches_runtime(runs_dir, repo_root, tmp_path):
    context = prepare_run(load_run_config(runs_dir / "two_state.json"), root=repo_root,
                          out_dir=tmp_path)
    assert context["runtime"]["seed"] == 7
    assert context["nu0"].tolist() == [1.0, 0.0]


def test_corrupted_kernel_fails(run):
    outcome = run("two_state_corrupted.json")
    assert outcome.exit_code == EXIT_FAIL
    assert any(r.check == "fdt_check" for r in outcome.report.failures)
    # the clean family still satisfies the kernel axioms
    assert all(r.passed for r in outcome.report.by_check("kernel_homogeneity"))


def test_delta_above_cap_aborts(run):
    with pytest.raises(DeltaTooLarge):
        run("cycles_big_delta.json")


def test_reproducible_runs_are_byte_identical(runs_dir, repo_root, tmp_path):
    config = load_run_config(runs_dir / "two_state.json")
    first = run_suite(config, root=repo_root, out_dir=tmp_path / "a", cli_args=REPRODUCIBLE)
    second = run_suite(config, root=repo_root, out_dir=tmp_path / "b", cli_args=REPRODUCIBLE)
    assert first.run_id == second.run_id
    assert first.outputs["csv"].read_bytes() == second.outputs["csv"].read_bytes()
    assert first.outputs["json"].read_bytes() == second.outputs["json"].read_bytes()
    assert "timestamp" not in read_json(first.outputs["json"])


@pytest.mark.parametrize("name", [
    "cycles.json",
    "glauber.json",
    "metropolis.json",
    "three_cycle_general_b.json",
    "three_cycle_langevin.json",
])
def test_shipped_runs_pass(run, name):
    outcome = run(name, write=False)
    assert outcome.exit_code == EXIT_PASS, outcome.report.failures[:5]
    assert outcome.outputs == {}


def test_checks_override(run):
    outcome = run("two_state.json", checks_override=["fdt"], write=False)
    assert {r.check for r in outcome.report} == {
        "fdt_check", "fdt_static", "static_identity", "kernel_row_sum", "kernel_homogeneity",
    }


def test_fdt_rows_name_their_observable(run):
    outcome = run("two_state.json", checks_override=["fdt"], write=False)
    observables = {r.params["g"] for r in outcome.report.by_check("fdt_check")}
    assert observables == {"g", "f"}
    assert {r.params["g"] for r in outcome.report.by_check("static_identity")} == {"g", "f"}


def test_unknown_check(run):
    with pytest.raises(ValidationError) as exc:
        run("two_state.json", checks_override=["nope"], write=False)
    assert "fdt" in exc.value.details["known"]


def test_default_checks_skip_inapplicable(runs_dir, repo_root, tmp_path):
    context = prepare_run(load_run_config(runs_dir / "three_cycle_langevin.json"),
                          root=repo_root, out_dir=tmp_path)
    names = [c.name for c in select_checks(context)]
    assert "green_kubo" not in names
    assert "b_symmetry" not in names
    assert names[:2] == ["fdt", "lemma"]


def test_torus_grid_run(run):
    outcome = run("torus.yaml", write=False)
    assert outcome.exit_code == EXIT_PASS, outcome.report.failures[:5]
    assert {r.check for r in outcome.report} >= {"fdt_check", "grid_tv_order", "njd_ratio"}


def test_torus_model_rejects_finite_family(models_dir, repo_root, tmp_path):
    config = run_config_from_dict({"model": str(models_dir / "torus_cos.json"),
                                   "checks": ["fdt"]})
    with pytest.raises(ValidationError):
        run_suite(config, root=repo_root, out_dir=tmp_path, write=False)
