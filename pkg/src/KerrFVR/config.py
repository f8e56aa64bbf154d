import json
import math
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .errors import ConfigError
from .kerr_dynamics import HARMONIC, KERR, Dynamics
from .phase_space import Grid2D, PhasePoint
from .states import COHERENT, DISPLACED_FOCK, StateSpec

COUNT = "count"
SIGNED = "signed"
ROTATION = "rotation"
MASLOV_CONVENTIONS = (ROTATION, COUNT, SIGNED)

WIGNER_QUANTUM = "wigner_quantum"
WIGNER_CLASSICAL = "wigner_classical"
WIGNER_FVR = "wigner_fvr"
CAUSTIC_MAP = "caustic_map"
AUTOCORR = "autocorr"
MARGINALS = "marginals"
FRAMES = "frames"
OUTPUT_KINDS = (WIGNER_QUANTUM, WIGNER_CLASSICAL, WIGNER_FVR, CAUSTIC_MAP, AUTOCORR, MARGINALS, FRAMES)


class QuadratureSpec:
    """Configuration for the chord-plane quadrature and the Maslov index"""
    def __init__(
        self,
        chord_halfwidth: Optional[float] = None,
        chord_samples: int = 512,
        maslov_time_samples: int = 64,
        chi_cutoff: float = 1e-12,
        refine_bisection_tol: float = 1e-8,
        maslov_convention: str = ROTATION,
        samples_per_turn: int = 16,
        max_time_samples: int = 4096,
        check_convergence: bool = True,
        convergence_tol: float = 1e-2,
        support_margin: Optional[float] = 4.5
    ):
        self.chord_halfwidth = None if chord_halfwidth is None else float(chord_halfwidth)
        self.chord_samples = int(chord_samples)
        self.maslov_time_samples = int(maslov_time_samples)
        self.chi_cutoff = float(chi_cutoff)
        self.refine_bisection_tol = float(refine_bisection_tol)
        self.maslov_convention = maslov_convention
        self.samples_per_turn = int(samples_per_turn)
        self.max_time_samples = int(max_time_samples)
        self.check_convergence = check_convergence
        self.convergence_tol = float(convergence_tol)
        self.support_margin = None if support_margin is None else float(support_margin)

    def validate(self):
        """Validate the configuration values."""
        if self.chord_halfwidth is not None and self.chord_halfwidth <= 0:
            raise _invalid("chord_halfwidth", "Chord halfwidth must be greater than 0.")
        if self.chord_samples < 16:
            raise _invalid("chord_samples", "Chord samples per axis must be greater than or equal to 16.")
        if self.maslov_time_samples < 8:
            raise _invalid("maslov_time_samples", "Maslov time samples must be greater than or equal to 8.")
        if not 0 < self.chi_cutoff < 1:
            raise _invalid("chi_cutoff", "Chord-function cutoff must lie in (0, 1).")
        if not 0 < self.refine_bisection_tol < 1:
            raise _invalid("refine_bisection_tol", "Bisection tolerance must lie in (0, 1).")
        if self.maslov_convention not in MASLOV_CONVENTIONS:
            raise _invalid("maslov_convention",
                           f"Maslov convention must be one of: {', '.join(MASLOV_CONVENTIONS)}.")
        if self.samples_per_turn < 4:
            raise _invalid("samples_per_turn", "Samples per turn must be greater than or equal to 4.")
        if self.max_time_samples < self.maslov_time_samples:
            raise _invalid("max_time_samples", "Max time samples must not be below the Maslov time samples.")
        if not self.convergence_tol > 0:
            raise _invalid("convergence_tol", "Convergence tolerance must be greater than 0.")
        if self.support_margin is not None and self.support_margin <= 0:
            raise _invalid("support_margin", "Support margin must be greater than 0.")

    def support_radius(self, state: StateSpec, radius: float) -> Optional[float]:
        """Largest endpoint radius |eta'| kept in the chord sum at a node of radius |x'|.

        Kerr and harmonic flows preserve |eta|, so endpoints beyond the bulk of
        the initial state plus the margin carry no stationary contribution.
        The node radius plus the margin is the floor, which keeps the t = 0
        sum exact away from the state. None when the margin is disabled.
        """
        if self.support_margin is None:
            return None
        return max(state.extent, radius) + self.support_margin

    def halfwidth_for(self, radius: float, support: Optional[float] = None) -> float:
        """Chord-domain halfwidth L at a node of radius |x'|.

        With a support radius R, L = 2 sqrt(R^2 - |x'|^2) encloses every chord
        whose endpoints both lie within R; without one it is 2 (|x'| + 6).
        """
        if self.chord_halfwidth is not None:
            return self.chord_halfwidth
        if support is None:
            return 2.0 * (radius + 6.0)
        return 2.0 * math.sqrt(max(support ** 2 - radius ** 2, 0.0))

    def with_samples(self, chord_samples: int) -> 'QuadratureSpec':
        spec = QuadratureSpec(**self.__dict__)
        spec.chord_samples = int(chord_samples)
        return spec


def _invalid(key: str, message: str) -> ConfigError:
    return ConfigError(f"quadrature.{key}", message)


class DisplayConfig:
    """Configuration for field display and heatmap rendering"""
    def __init__(
        self,
        nrows: int = 40,
        ncols: int = 40,
        vmax: Optional[float] = None,
        show_axes: bool = True,
        show_contours: bool = True,
        show_hbar_square: bool = False,
        container_height: str = "500px",
        as_html: Optional[bool] = None,
        dpi: int = 150,
        figsize: float = 5.0,
        title: Optional[str] = None
    ):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.vmax = None if vmax is None else float(vmax)
        self.show_axes = show_axes
        self.show_contours = show_contours
        self.show_hbar_square = show_hbar_square
        self.container_height = container_height
        self.as_html = as_html
        self.dpi = int(dpi)
        self.figsize = float(figsize)
        self.title = title

    def validate(self):
        """Validate the configuration values."""
        if self.nrows < 0:
            raise ValueError("Number of rows must be greater than or equal to 0.")
        if self.ncols < 0:
            raise ValueError("Number of columns must be greater than or equal to 0.")
        if self.vmax is not None and self.vmax <= 0:
            raise ValueError("Color scale limit must be greater than 0.")
        if self.dpi < 10:
            raise ValueError("Resolution must be greater than or equal to 10 dpi.")
        if self.figsize <= 0:
            raise ValueError("Figure size must be greater than 0.")


_PI_TIME = re.compile(r"^\s*(?P<sign>[-+]?)\s*(?P<num>[0-9]*)\s*\*?\s*pi\s*(?:/\s*(?P<den>[0-9]+))?\s*$")


class TimeValue:
    """A propagation time, kept as an exact multiple of pi when given that way"""
    def __init__(self, value: float, pi_multiple: Optional[Fraction] = None, label: Optional[str] = None):
        self.value = float(value)
        self.pi_multiple = pi_multiple
        self.label = label or (str(value) if pi_multiple is None else self._pi_label(pi_multiple))

    @staticmethod
    def _pi_label(frac: Fraction) -> str:
        num = {1: "", -1: "-"}.get(frac.numerator, str(frac.numerator))
        if frac.numerator == 0:
            return "0"
        return f"{num}pi" if frac.denominator == 1 else f"{num}pi/{frac.denominator}"

    @classmethod
    def parse(cls, raw: Union[str, int, float]) -> 'TimeValue':
        """Accepts numbers and strings such as "pi/8", "3pi/4", "2*pi", "0.013".

        A leading sign is accepted so that negative times reach validate().
        """
        if isinstance(raw, bool):
            raise ValueError(f"Cannot parse time {raw!r}")
        if isinstance(raw, (int, float)):
            return cls(float(raw))
        match = _PI_TIME.match(str(raw))
        if match:
            frac = Fraction(int(match.group("num") or 1), int(match.group("den") or 1))
            if match.group("sign") == "-":
                frac = -frac
            return cls(float(frac) * math.pi, frac)
        try:
            return cls(float(raw), label=str(raw).strip())
        except ValueError:
            raise ValueError(f"Cannot parse time {raw!r}; use a number or a multiple of pi like 'pi/8'")

    @property
    def tag(self) -> str:
        """File-name safe label"""
        return self.label.replace("/", "_").replace("*", "").replace(".", "p")

    def __repr__(self) -> str:
        return f"TimeValue({self.label})"


def _state_from(raw: Dict[str, Any], path: str) -> StateSpec:
    _check_keys(raw, ("kind", "center", "n"), path)
    kind = raw.get("kind", COHERENT)
    center = raw.get("center", [0.0, 0.0])
    try:
        center = PhasePoint(float(center[0]), float(center[1]))
        if kind == COHERENT:
            return StateSpec.coherent(center)
        if kind == DISPLACED_FOCK:
            return StateSpec.displaced_fock(raw.get("n", 1), center)
        return StateSpec(kind, center)
    except (TypeError, ValueError, IndexError) as e:
        raise ConfigError(path, str(e))


def _dynamics_from(raw: Dict[str, Any], path: str) -> Dynamics:
    _check_keys(raw, ("kind", "omega0"), path)
    try:
        if raw.get("kind", KERR) == HARMONIC:
            return Dynamics.harmonic(raw.get("omega0", 1.0))
        return Dynamics(raw.get("kind", KERR))
    except (TypeError, ValueError) as e:
        raise ConfigError(path, str(e))


def _grid_from(raw: Dict[str, Any], path: str) -> Grid2D:
    keys = ("q_min", "q_max", "p_min", "p_max", "n_q", "n_p")
    _check_keys(raw, keys, path)
    missing = [k for k in keys if k not in raw]
    if missing:
        raise ConfigError(f"{path}.{missing[0]}", "required")
    try:
        return Grid2D(float(raw["q_min"]), float(raw["q_max"]), float(raw["p_min"]),
                      float(raw["p_max"]), int(raw["n_q"]), int(raw["n_p"]))
    except (TypeError, ValueError) as e:
        raise ConfigError(path, str(e))


def _check_keys(raw: Any, allowed, path: str):
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object")
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key,
                              f"unknown parameter. Possible values are: {', '.join(allowed)}")


class RunConfig:
    """Everything a run needs: state, dynamics, times, grids, quadrature and outputs"""
    def __init__(
        self,
        state: Optional[StateSpec] = None,
        dynamics: Optional[Dynamics] = None,
        times: Optional[List[Union[str, float, TimeValue]]] = None,
        grid: Optional[Grid2D] = None,
        quadrature: Optional[QuadratureSpec] = None,
        truncation: int = 64,
        outputs: Optional[List[str]] = None,
        output_dir: Union[str, Path] = "kerr_fvr_out",
        workers: int = 1,
        caustic_point: Optional[PhasePoint] = None,
        chord_grid: Optional[Grid2D] = None,
        name: str = "run"
    ):
        self.state = state or StateSpec.coherent((5.0, 0.0))
        self.dynamics = dynamics or Dynamics.kerr()
        self.times = [t if isinstance(t, TimeValue) else TimeValue.parse(t) for t in (times or ["0"])]
        self.grid = grid or Grid2D.square(8.0, 128)
        self.quadrature = quadrature or QuadratureSpec()
        self.truncation = int(truncation)
        self.outputs = list(outputs or [WIGNER_QUANTUM])
        self.output_dir = Path(output_dir)
        self.workers = int(workers)
        self.caustic_point = caustic_point or PhasePoint(5.0, 2.0)
        self.chord_grid = chord_grid or Grid2D.square(2.0, 201)
        self.name = name

    def validate(self):
        """Validate the configuration values."""
        if not self.times:
            raise ConfigError("times", "at least one time is required")
        for i, t in enumerate(self.times):
            if t.value < 0:
                raise ConfigError(f"times[{i}]", "times must be non-negative")
        for i, kind in enumerate(self.outputs):
            if kind not in OUTPUT_KINDS:
                raise ConfigError(f"outputs[{i}]",
                                  f"unknown output '{kind}'. Possible values are: {', '.join(OUTPUT_KINDS)}")
        if not self.dynamics.is_kerr:
            for i, kind in enumerate(self.outputs):
                if kind in (WIGNER_QUANTUM, MARGINALS, AUTOCORR):
                    raise ConfigError(f"outputs[{i}]", f"'{kind}' needs the quantum Kerr oracle; use kerr dynamics")
        if self.truncation < 1:
            raise ConfigError("truncation", "must be greater than or equal to 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be greater than or equal to 1")
        self.quadrature.validate()

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> 'RunConfig':
        allowed = ("name", "state", "dynamics", "times", "grid", "quadrature", "truncation",
                   "outputs", "output_dir", "workers", "caustic")
        _check_keys(raw, allowed, "")
        kwargs: Dict[str, Any] = {}
        if "state" in raw:
            kwargs["state"] = _state_from(raw["state"], "state")
        if "dynamics" in raw:
            kwargs["dynamics"] = _dynamics_from(raw["dynamics"], "dynamics")
        if "grid" in raw:
            kwargs["grid"] = _grid_from(raw["grid"], "grid")
        if "quadrature" in raw:
            q = raw["quadrature"]
            _check_keys(q, tuple(QuadratureSpec().__dict__), "quadrature")
            for key, value in q.items():
                try:
                    QuadratureSpec(**{key: value})
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"quadrature.{key}", str(e))
            kwargs["quadrature"] = QuadratureSpec(**q)
        if "times" in raw:
            if not isinstance(raw["times"], list):
                raise ConfigError("times", "expected a list")
            times = []
            for i, t in enumerate(raw["times"]):
                try:
                    times.append(TimeValue.parse(t))
                except ValueError as e:
                    raise ConfigError(f"times[{i}]", str(e))
            if not times:
                raise ConfigError("times", "at least one time is required")
            kwargs["times"] = times
        if "caustic" in raw:
            c = raw["caustic"]
            _check_keys(c, ("x_final", "chord_grid"), "caustic")
            if "x_final" in c:
                try:
                    kwargs["caustic_point"] = PhasePoint(float(c["x_final"][0]), float(c["x_final"][1]))
                except (TypeError, ValueError, IndexError) as e:
                    raise ConfigError("caustic.x_final", str(e))
            if "chord_grid" in c:
                kwargs["chord_grid"] = _grid_from(c["chord_grid"], "caustic.chord_grid")
        for key in ("name", "truncation", "outputs", "output_dir", "workers"):
            if key in raw:
                kwargs[key] = raw[key]
        if "outputs" in kwargs and not isinstance(kwargs["outputs"], list):
            raise ConfigError("outputs", "expected a list")
        for key in ("truncation", "workers"):
            if key in kwargs and (isinstance(kwargs[key], bool) or not isinstance(kwargs[key], int)):
                raise ConfigError(key, "expected an integer")
        config = cls(**kwargs)
        config.validate()
        return config

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'RunConfig':
        try:
            with open(path) as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError("", f"Error reading config file {path}: {e}")
        return cls.from_dict(raw)

    def to_dict(self) -> Dict[str, Any]:
        g = self.grid
        c = self.chord_grid
        return {
            "name": self.name,
            "state": {"kind": self.state.kind, "center": [self.state.center.q, self.state.center.p],
                      "n": self.state.n},
            "dynamics": {"kind": self.dynamics.kind, "omega0": self.dynamics.omega0},
            "times": [t.label for t in self.times],
            "grid": {"q_min": g.q_min, "q_max": g.q_max, "p_min": g.p_min, "p_max": g.p_max,
                     "n_q": g.n_q, "n_p": g.n_p},
            "quadrature": dict(self.quadrature.__dict__),
            "truncation": self.truncation,
            "outputs": list(self.outputs),
            "output_dir": str(self.output_dir),
            "workers": self.workers,
            "caustic": {"x_final": [self.caustic_point.q, self.caustic_point.p],
                        "chord_grid": {"q_min": c.q_min, "q_max": c.q_max, "p_min": c.p_min,
                                       "p_max": c.p_max, "n_q": c.n_q, "n_p": c.n_p}},
        }

    @classmethod
    def recipe(cls, name: str, **overrides) -> 'RunConfig':
        """Ready-made configurations reproducing the figures of the Kerr study.

        fig1 uses t1 = 0.02 and t2 = 0.1 as stand-ins on either side of the
        Ehrenfest time (about 0.063); the two fractional revivals are exact.
        """
        coherent = StateSpec.coherent((5.0, 0.0))
        fig1_times = ["0.02", "0.1", "pi/20", "pi/8"]
        recipes = {
            "fig1": dict(state=coherent, times=fig1_times,
                         outputs=[WIGNER_CLASSICAL, WIGNER_QUANTUM, FRAMES]),
            "fig3": dict(state=coherent, times=fig1_times,
                         outputs=[WIGNER_FVR, WIGNER_QUANTUM, FRAMES]),
            "fig3_caustics": dict(state=coherent, times=["0.013", "0.071"], outputs=[CAUSTIC_MAP, FRAMES],
                                  caustic_point=PhasePoint(5.0, 2.0),
                                  chord_grid=Grid2D.square(6.0, 241)),
            "fig4": dict(state=StateSpec.displaced_fock(1, (5.0, 0.0)), times=["pi/12"],
                         outputs=[WIGNER_FVR, WIGNER_QUANTUM, MARGINALS, FRAMES]),
            "fig5": dict(state=coherent,
                         times=[TimeValue(k * math.pi / 8.0 / 40.0,
                                          Fraction(k, 320) if k else Fraction(0),
                                          label=f"{k}pi/320") for k in range(40)] + ["pi/8"],
                         outputs=[AUTOCORR]),
        }
        if name not in recipes:
            raise ConfigError("recipe", f"unknown recipe '{name}'. Possible values are: {', '.join(recipes)}")
        kwargs = dict(recipes[name], name=name)
        for key, value in overrides.items():
            if value is not None:
                kwargs[key] = value
        config = cls(**kwargs)
        config.validate()
        return config
