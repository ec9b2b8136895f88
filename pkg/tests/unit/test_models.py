"""Model documents, run configs and family construction."""

import numpy as np
import pytest

from fdtlab.app.infra.errors import ParseError, ValidationError
from fdtlab.app.models.bundle import b_matrix, build_family
from fdtlab.app.models.loader import (
    describe_error,
    field_path,
    load_model,
    load_model_data,
    load_run_config,
    run_config_from_dict,
)
from fdtlab.app.models.schema import BEntrySpec
from fdtlab.app.perturb.family import FamilyKind


def _rates(**overrides):
    doc = {
        "kind": "rates",
        "states": ["a", "b"],
        "rates": [{"from": "a", "to": "b", "rate": 1.0}, {"from": "b", "to": "a", "rate": 2.0}],
        "observables": {"f": [0.0, 1.0]},
    }
    doc.update(overrides)
    return doc


class TestShippedModels:
    def test_two_state(self, models_dir):
        bundle = load_model(models_dir / "two_state.json")
        assert bundle.kind == "rates"
        assert bundle.space.labels == ("a", "b")
        np.testing.assert_allclose(bundle.mu0.weights, [2 / 3, 1 / 3], atol=1e-14)
        np.testing.assert_array_equal(bundle.observable("g").values, [1.0, -1.0])
        assert bundle.source == models_dir / "two_state.json"

    def test_integer_labels(self, models_dir):
        bundle = load_model(models_dir / "three_cycle.json")
        assert bundle.generator.rates[0, 1] == 2.0
        assert bundle.generator.rates[1, 0] == 1.0
        np.testing.assert_allclose(bundle.mu0.weights, 1 / 3, atol=1e-14)

    def test_hamiltonian(self, models_dir):
        bundle = load_model(models_dir / "metropolis_ring.json")
        assert bundle.dynamics == "metropolis"
        assert bundle.describe()["edges"] == 4
        h = np.array([0.0, 0.7, 0.2, -0.4])
        np.testing.assert_allclose(bundle.mu0.weights, np.exp(-h) / np.exp(-h).sum())
        # detailed balance against the Gibbs law
        flux = bundle.mu0.weights[:, None] * bundle.generator.offdiag
        np.testing.assert_allclose(flux, flux.T, atol=1e-14)

    def test_cycles(self, models_dir):
        bundle = load_model(models_dir / "cycles_triangle.json")
        assert len(bundle.cycles) == 2
        np.testing.assert_allclose(bundle.mu0.weights @ bundle.generator.rates, 0.0, atol=1e-13)

    def test_torus(self, models_dir):
        bundle = load_model(models_dir / "torus_cos.json")
        assert not bundle.is_finite
        assert bundle.torus.psi == 0.3
        assert set(bundle.observables) == {"f", "g"}
        assert bundle.describe()["reversible"] is False

    def test_unknown_observable(self, models_dir):
        bundle = load_model(models_dir / "two_state.json")
        with pytest.raises(ValidationError) as exc:
            bundle.observable("nope")
        assert exc.value.details["known"] == ["f", "g"]


class TestValidation:
    def test_negative_rate(self):
        doc = _rates(rates=[{"from": "a", "to": "b", "rate": -1.0}])
        with pytest.raises(ValidationError) as exc:
            load_model_data(doc)
        assert str(exc.value) == "rates[0].rate < 0"

    def test_frozen_chain_is_reducible(self):
        with pytest.raises(ValidationError) as exc:
            load_model_data(_rates(rates=[]))
        assert str(exc.value).startswith("jump graph is not strongly connected")
        assert exc.value.details["cause"]["code"] == "REDUCIBLE"
        assert exc.value.details["cause"]["details"] == {"n_components": 2}

    def test_bound_formatting(self):
        error = {"loc": ("rates", 0, "rate"), "type": "greater_than_equal", "ctx": {"ge": 0.0}}
        assert describe_error(error) == "rates[0].rate < 0"
        error = {"loc": ("eps",), "type": "greater_than", "ctx": {"gt": 1e-3}}
        assert describe_error(error) == "eps <= 0.001"

    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="kind must be one of"):
            load_model_data(_rates(kind="graph"))

    def test_not_an_object(self):
        with pytest.raises(ValidationError):
            load_model_data([1, 2])

    def test_extra_field(self):
        with pytest.raises(ValidationError, match="colour is not a known field"):
            load_model_data(_rates(colour="red"))

    def test_missing_field(self):
        doc = _rates()
        del doc["rates"]
        with pytest.raises(ValidationError, match="rates is required"):
            load_model_data(doc)

    def test_duplicate_states(self):
        with pytest.raises(ValidationError, match="states must be unique"):
            load_model_data(_rates(states=["a", "a"]))

    def test_observable_length(self):
        with pytest.raises(ValidationError, match="observables.f has 3 values"):
            load_model_data(_rates(observables={"f": [1.0, 2.0, 3.0]}))

    def test_all_errors_in_details(self):
        doc = _rates(rates=[{"from": "a", "to": "b", "rate": -1.0}], colour="red")
        with pytest.raises(ValidationError) as exc:
            load_model_data(doc)
        assert len(exc.value.details["errors"]) == 2

    def test_construction_errors_are_validation_errors(self):
        with pytest.raises(ValidationError) as exc:
            load_model_data(_rates(rates=[{"from": "a", "to": "b", "rate": 1.0}]))
        assert "cause" in exc.value.details
        with pytest.raises(ValidationError):
            load_model_data(_rates(rates=[{"from": "a", "to": "c", "rate": 1.0}]))

    def test_disconnected_graph(self):
        doc = {"kind": "hamiltonian", "states": [0, 1, 2], "edges": [[0, 1]], "H": [0, 0, 0]}
        with pytest.raises(ValidationError) as exc:
            load_model_data(doc)
        assert exc.value.details["cause"]["code"] == "DISCONNECTED"

    def test_hamiltonian_missing_energy(self):
        doc = {"kind": "hamiltonian", "states": ["a", "b"], "edges": [["a", "b"]],
               "H": {"a": 1.0}}
        with pytest.raises(ValidationError, match="H is missing states"):
            load_model_data(doc)

    def test_cycles_mu0(self):
        doc = {"kind": "cycles", "states": [0, 1, 2],
               "cycles": [{"states": [0, 1, 2], "alpha": 1.0}], "mu0": [1.0, 0.0, 1.0]}
        with pytest.raises(ValidationError, match="mu0 must be strictly positive"):
            load_model_data(doc)

    def test_field_path(self):
        assert field_path(("rates", 3, "rate")) == "rates[3].rate"
        assert field_path(()) == ""


class TestParsing:
    def test_json_syntax_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "kind": "rates",\n  "states": [1, 2,\n}\n', encoding="utf-8")
        with pytest.raises(ParseError) as exc:
            load_model(path)
        assert exc.value.details["line"] is not None

    def test_yaml_syntax_error(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("kind: rates\nstates: [a, b\n", encoding="utf-8")
        with pytest.raises(ParseError) as exc:
            load_model(path)
        assert exc.value.code == "PARSE_ERROR"

    def test_yaml_model(self, tmp_path):
        path = tmp_path / "m.yaml"
        path.write_text(
            "kind: rates\nstates: [a, b]\nrates:\n"
            "  - {from: a, to: b, rate: 1.0}\n  - {from: b, to: a, rate: 2.0}\n",
            encoding="utf-8",
        )
        assert load_model(path).space.n == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError) as exc:
            load_model(tmp_path / "absent.json")
        assert exc.value.code == "FILE_NOT_FOUND"


class TestRunConfig:
    def test_model_path_is_resolved(self, runs_dir, models_dir):
        config = load_run_config(runs_dir / "two_state.json")
        assert config.model == str((models_dir / "two_state.json").resolve())
        assert config.g == ["g", "f"]
        assert config.config == {"runtime": {"seed": 7}}

    def test_yaml_run_config(self, runs_dir):
        config = load_run_config(runs_dir / "torus.yaml")
        assert config.times == [(0.5, 1.0)]
        assert config.mc.n_grid == 128

    def test_defaults(self):
        config = run_config_from_dict({"model": "m.json"})
        assert config.family == "TimeChange"
        assert config.g == ["g"]
        assert config.window == (0.0, 0.0)
        assert config.mc.grids == [64, 128, 256]

    def test_base_directory(self, tmp_path):
        config = run_config_from_dict({"model": "m.json"}, base=tmp_path)
        assert config.model == str((tmp_path / "m.json").resolve())

    def test_bad_times(self):
        with pytest.raises(ValidationError, match="needs 0 <= s <= t"):
            run_config_from_dict({"model": "m.json", "times": [[2.0, 1.0]]})

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            run_config_from_dict({"model": "m.json", "famly": "Cycle"})

    @pytest.mark.parametrize("field, value, message", [
        ("dt", 0.0, "mc.dt <= 0"),
        ("n_paths", 0, "mc.n_paths < 1"),
        ("bins", 1, "mc.bins < 2"),
    ])
    def test_bound_messages(self, field, value, message):
        with pytest.raises(ValidationError) as exc:
            run_config_from_dict({"model": "m.json", "mc": {field: value}})
        assert str(exc.value) == message


class TestBuildFamily:
    @pytest.mark.parametrize("model, kind", [
        ("two_state.json", "TimeChange"),
        ("three_cycle.json", "Langevin"),
        ("three_cycle.json", "GeneralB"),
        ("cycles_triangle.json", "Cycle"),
        ("metropolis_ring.json", "Metropolis"),
        ("glauber_path.json", "Glauber"),
    ])
    def test_shipped(self, models_dir, model, kind):
        bundle = load_model(models_dir / model)
        fam = build_family(bundle, kind, bundle.observable("f"))
        assert fam.kind is FamilyKind.parse(kind)
        assert fam.n == bundle.space.n

    def test_cycle_needs_cycles_model(self, models_dir):
        bundle = load_model(models_dir / "two_state.json")
        with pytest.raises(ValidationError, match="needs a 'cycles' model"):
            build_family(bundle, "Cycle", bundle.observable("f"))

    def test_gibbs_needs_hamiltonian(self, models_dir):
        bundle = load_model(models_dir / "two_state.json")
        with pytest.raises(ValidationError, match="needs a 'hamiltonian' model"):
            build_family(bundle, "Glauber", bundle.observable("f"))

    def test_torus_is_not_finite(self, models_dir):
        bundle = load_model(models_dir / "torus_cos.json")
        with pytest.raises(ValidationError, match="needs a finite-state model"):
            build_family(bundle, "TimeChange", None)

    def test_explicit_b(self, models_dir):
        bundle = load_model(models_dir / "three_cycle.json")
        entries = [BEntrySpec.model_validate({"from": 0, "to": 1, "value": -0.5}),
                   BEntrySpec.model_validate({"from": 1, "to": 0, "value": 0.5})]
        b = b_matrix(bundle, entries)
        assert b[0, 1] == -0.5 and b[1, 0] == 0.5
        assert np.count_nonzero(b) == 2

    def test_default_b_is_adjoint_difference(self, models_dir):
        bundle = load_model(models_dir / "three_cycle.json")
        b = b_matrix(bundle, None)
        # c* − c on the driven 3-cycle: ±1 on every directed edge
        assert b[0, 1] == pytest.approx(-1.0)
        assert b[1, 0] == pytest.approx(1.0)
