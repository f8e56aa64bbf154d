import json
import math
from fractions import Fraction

import pytest

from KerrFVR.config import (AUTOCORR, ROTATION, SIGNED, WIGNER_FVR, WIGNER_QUANTUM, DisplayConfig,
                            QuadratureSpec, RunConfig, TimeValue)
from KerrFVR.errors import ConfigError
from KerrFVR.kerr_dynamics import Dynamics
from KerrFVR.phase_space import Grid2D, PhasePoint
from KerrFVR.states import DISPLACED_FOCK, StateSpec


class TestQuadratureSpec:
    def test_defaults(self):
        spec = QuadratureSpec()
        spec.validate()
        assert spec.chord_samples == 512
        assert spec.maslov_convention == ROTATION
        assert spec.check_convergence
        assert spec.halfwidth_for(5.0) == pytest.approx(22.0)
        assert QuadratureSpec(chord_halfwidth=3.0).halfwidth_for(5.0) == 3.0

    def test_chord_domain_from_support(self):
        spec = QuadratureSpec()
        state = StateSpec.coherent((3.0, 4.0))
        assert spec.support_radius(state, 1.0) == pytest.approx(10.5)
        assert spec.support_radius(state, 8.0) == pytest.approx(12.5)
        assert spec.halfwidth_for(3.0, 5.0) == pytest.approx(8.0)
        assert QuadratureSpec(chord_halfwidth=3.0).halfwidth_for(3.0, 5.0) == 3.0
        assert QuadratureSpec(support_margin=None).support_radius(state, 1.0) is None

    @pytest.mark.parametrize("kwargs,match", [
        ({"chord_samples": 8}, "Chord samples"),
        ({"chord_halfwidth": 0.0}, "halfwidth"),
        ({"maslov_time_samples": 4}, "Maslov time samples"),
        ({"chi_cutoff": 0.0}, "cutoff"),
        ({"maslov_convention": "winding"}, "convention"),
        ({"max_time_samples": 32}, "Max time samples"),
        ({"convergence_tol": -1.0}, "Convergence"),
        ({"support_margin": 0.0}, "Support margin"),
    ])
    def test_invalid(self, kwargs, match):
        with pytest.raises(ValueError, match=match):
            QuadratureSpec(**kwargs).validate()

    def test_errors_name_the_field(self):
        with pytest.raises(ConfigError) as info:
            QuadratureSpec(chord_samples=8).validate()
        assert info.value.path == "quadrature.chord_samples"

    def test_with_samples(self):
        spec = QuadratureSpec(maslov_convention=SIGNED)
        coarse = spec.with_samples(64)
        assert coarse.chord_samples == 64
        assert coarse.maslov_convention == SIGNED
        assert spec.chord_samples == 512


def test_display_config_validation():
    DisplayConfig().validate()
    with pytest.raises(ValueError, match="rows"):
        DisplayConfig(nrows=-1).validate()
    with pytest.raises(ValueError, match="Figure size"):
        DisplayConfig(figsize=0).validate()


class TestTimeValue:
    @pytest.mark.parametrize("raw,value,multiple,label", [
        ("pi/8", math.pi / 8, Fraction(1, 8), "pi/8"),
        ("3pi/4", 3 * math.pi / 4, Fraction(3, 4), "3pi/4"),
        ("2*pi", 2 * math.pi, Fraction(2), "2pi"),
        ("pi", math.pi, Fraction(1), "pi"),
        ("-pi/8", -math.pi / 8, Fraction(-1, 8), "-pi/8"),
        ("+3pi/4", 3 * math.pi / 4, Fraction(3, 4), "3pi/4"),
    ])
    def test_pi_multiples(self, raw, value, multiple, label):
        t = TimeValue.parse(raw)
        assert t.value == pytest.approx(value)
        assert t.pi_multiple == multiple
        assert t.label == label

    def test_plain_numbers(self):
        assert TimeValue.parse("0.013").value == 0.013
        assert TimeValue.parse("0.013").tag == "0p013"
        assert TimeValue.parse(0.5).pi_multiple is None
        assert TimeValue.parse(2).value == 2.0

    def test_tag(self):
        assert TimeValue.parse("pi/8").tag == "pi_8"

    @pytest.mark.parametrize("raw", ["pie", "pi/", "", True])
    def test_invalid(self, raw):
        with pytest.raises(ValueError):
            TimeValue.parse(raw)


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        config.validate()
        assert config.state.center == PhasePoint(5.0, 0.0)
        assert config.dynamics.is_kerr
        assert config.outputs == [WIGNER_QUANTUM]
        assert config.times[0].value == 0.0

    def test_from_dict(self):
        config = RunConfig.from_dict({
            "name": "fock",
            "state": {"kind": "displaced_fock", "n": 1, "center": [5, 0]},
            "times": ["pi/12", 0.05],
            "grid": {"q_min": -8, "q_max": 8, "p_min": -8, "p_max": 8, "n_q": 64, "n_p": 32},
            "quadrature": {"chord_samples": 256, "maslov_convention": "signed"},
            "outputs": ["wigner_fvr", "marginals"],
            "workers": 4,
            "caustic": {"x_final": [5, 2], "chord_grid": {"q_min": -2, "q_max": 2, "p_min": -2,
                                                           "p_max": 2, "n_q": 11, "n_p": 11}},
        })
        assert config.state.kind == DISPLACED_FOCK
        assert config.state.n == 1
        assert [t.label for t in config.times] == ["pi/12", "0.05"]
        assert config.grid == Grid2D(-8.0, 8.0, -8.0, 8.0, 64, 32)
        assert config.quadrature.chord_samples == 256
        assert config.quadrature.maslov_convention == SIGNED
        assert config.workers == 4
        assert config.caustic_point == PhasePoint(5.0, 2.0)
        assert config.chord_grid.n_q == 11

    @pytest.mark.parametrize("raw,path", [
        ({"colour": "red"}, "colour"),
        ({"state": {"kind": "squeezed"}}, "state"),
        ({"state": {"center": [1]}}, "state"),
        ({"grid": {"q_min": -1, "q_max": 1, "p_min": -1, "p_max": 1, "n_q": 5}}, "grid.n_p"),
        ({"grid": {"q_min": 1, "q_max": -1, "p_min": -1, "p_max": 1, "n_q": 5, "n_p": 5}}, "grid"),
        ({"quadrature": {"chord_samples": 4}}, "quadrature.chord_samples"),
        ({"quadrature": {"maslov_convention": "winding"}}, "quadrature.maslov_convention"),
        ({"quadrature": {"chord_samples": 256, "chi_cutoff": "tiny"}}, "quadrature.chi_cutoff"),
        ({"quadrature": {"samples": 4}}, "quadrature.samples"),
        ({"times": ["soon"]}, "times[0]"),
        ({"times": []}, "times"),
        ({"times": ["-0.5"]}, "times[0]"),
        ({"times": ["pi/8", "-pi/8"]}, "times[1]"),
        ({"outputs": ["wigner_fvr", "movie"]}, "outputs[1]"),
        ({"workers": 0}, "workers"),
        ({"workers": "4"}, "workers"),
        ({"truncation": 0}, "truncation"),
        ({"dynamics": {"kind": "harmonic", "omega0": -1.0}}, "dynamics"),
        ({"caustic": {"x_final": "here"}}, "caustic.x_final"),
    ])
    def test_errors_carry_path(self, raw, path):
        with pytest.raises(ConfigError) as info:
            RunConfig.from_dict(raw)
        assert info.value.path == path

    def test_harmonic_needs_no_quantum_output(self):
        raw = {"dynamics": {"kind": "harmonic", "omega0": 1.0}, "outputs": ["wigner_fvr", "wigner_quantum"]}
        with pytest.raises(ConfigError) as info:
            RunConfig.from_dict(raw)
        assert info.value.path == "outputs[1]"
        config = RunConfig.from_dict({**raw, "outputs": ["wigner_fvr", "wigner_classical"]})
        assert config.dynamics == Dynamics.harmonic(1.0)

    def test_load(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"times": ["pi/8"], "outputs": ["autocorr"]}))
        config = RunConfig.load(path)
        assert config.outputs == [AUTOCORR]
        assert config.times[0].pi_multiple == Fraction(1, 8)

    def test_load_errors(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="Error reading config file"):
            RunConfig.load(path)
        with pytest.raises(ConfigError):
            RunConfig.load(tmp_path / "missing.json")

    def test_dict_round_trip(self):
        config = RunConfig.recipe("fig4")
        again = RunConfig.from_dict(json.loads(json.dumps(config.to_dict())))
        assert again.to_dict() == config.to_dict()


class TestRecipes:
    def test_fig1(self):
        config = RunConfig.recipe("fig1")
        assert [t.label for t in config.times] == ["0.02", "0.1", "pi/20", "pi/8"]
        assert config.state.kind == "coherent"

    def test_fig3_caustics(self):
        config = RunConfig.recipe("fig3_caustics")
        assert [t.value for t in config.times] == [0.013, 0.071]
        assert config.caustic_point == PhasePoint(5.0, 2.0)

    def test_fig5(self):
        config = RunConfig.recipe("fig5")
        assert len(config.times) == 41
        assert config.times[1].pi_multiple == Fraction(1, 320)
        assert config.times[-1].value == pytest.approx(math.pi / 8)
        assert config.outputs == [AUTOCORR]

    def test_overrides(self, tmp_path):
        config = RunConfig.recipe("fig3", output_dir=tmp_path, workers=None, outputs=[WIGNER_FVR])
        assert config.output_dir == tmp_path
        assert config.workers == 1
        assert config.outputs == [WIGNER_FVR]

    def test_unknown(self):
        with pytest.raises(ConfigError, match="fig1, fig3"):
            RunConfig.recipe("fig2")
