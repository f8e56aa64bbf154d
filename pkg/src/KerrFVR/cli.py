import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .acceptance import CHECKS, run_checks
from .config import (AUTOCORR, CAUSTIC_MAP, FRAMES, MARGINALS, WIGNER_CLASSICAL, WIGNER_FVR,
                     WIGNER_QUANTUM, DisplayConfig, RunConfig, TimeValue)
from .diagnostics import autocorr_overlap, count_zero_contours, normalization, post_normalize
from .errors import ConfigError, ConvergenceError, GridFileError, TruncationError
from .fvr_propagator import caustic_det_map, fvr_field, liouville_field
from .grid_io import GridReader, GridWriter
from .phase_space import Field
from .quantum_oracle import (MOMENTUM, POSITION, autocorr_exact, evolve, marginal, momentum_density,
                             position_density, wigner_of_state)
from .states import fock_coefficients, wigner0
from .viewer import FieldViewer

logger = logging.getLogger(__name__)

FIELD_OUTPUTS = (WIGNER_QUANTUM, WIGNER_CLASSICAL, WIGNER_FVR)
COMMAND_OUTPUTS = {
    "evolve": (WIGNER_QUANTUM, WIGNER_CLASSICAL, WIGNER_FVR, MARGINALS, FRAMES),
    "caustics": (CAUSTIC_MAP, FRAMES),
    "autocorr": (AUTOCORR,),
}
COMMAND_DEFAULT = {"evolve": WIGNER_QUANTUM, "caustics": CAUSTIC_MAP, "autocorr": AUTOCORR}

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_UNCONVERGED = 3


class Runner:
    """Executes a RunConfig, writing one artifact per requested output and time"""
    def __init__(self, config: RunConfig, allow_unconverged: bool = False):
        self.config = config
        self.allow_unconverged = allow_unconverged
        self.artifacts: List[Dict[str, Any]] = []
        self.n_unconverged = 0
        self._fock = None

    @property
    def fock(self):
        if self._fock is None:
            self._fock = fock_coefficients(self.config.state, self.config.truncation)
        return self._fock

    def _record(self, kind: str, path: Path, time: Optional[TimeValue] = None, **details) -> None:
        entry = {"kind": kind, "path": path.name}
        if time is not None:
            entry.update(time=time.value, time_label=time.label)
        entry.update(details)
        self.artifacts.append(entry)

    def _frame(self, field: Field, kind: str, time: TimeValue, index: int, **kwargs) -> None:
        path = self.config.output_dir / f"frame_{kind}_{index:04d}.png"
        FieldViewer.render_heatmap(field, path, DisplayConfig(title=f"{kind}, t = {time.label}", **kwargs))
        self._record(FRAMES, path, time, source=kind)

    def _field(self, kind: str, time: TimeValue) -> Field:
        config = self.config
        if kind == WIGNER_QUANTUM:
            return wigner_of_state(evolve(self.fock, time.value), config.grid)
        if kind == WIGNER_CLASSICAL:
            return liouville_field(config.grid, time.value, config.state, config.dynamics)
        field = fvr_field(config.grid, time.value, config.state, config.quadrature,
                          config.dynamics, config.workers)
        self.n_unconverged += int(np.count_nonzero(~field.diagnostics["converged"]))
        return field

    def evolve(self, outputs) -> None:
        config = self.config
        kinds = [k for k in FIELD_OUTPUTS if k in outputs]
        if MARGINALS in outputs and WIGNER_QUANTUM not in kinds:
            kinds.insert(0, WIGNER_QUANTUM)
        for index, time in enumerate(config.times):
            logger.info("Evolving to t = %s", time.label)
            fields = {}
            for kind in kinds:
                field = fields[kind] = self._field(kind, time)
                if kind not in outputs:
                    continue
                path = config.output_dir / f"{kind}_{time.tag}.wgr"
                GridWriter.write(field, path)
                details = {"normalization": normalization(field)}
                if field.diagnostics:
                    details.update(
                        max_imag_residue=float(np.max(field.diagnostics["imag_residue"])),
                        unconverged_nodes=int(np.count_nonzero(~field.diagnostics["converged"])),
                    )
                self._record(kind, path, time, **details)
                if FRAMES in outputs:
                    self._frame(field, kind, time, index)
            if MARGINALS in outputs:
                self._marginals(fields, time)

    def _marginals(self, fields: Dict[str, Field], time: TimeValue) -> None:
        state = evolve(self.fock, time.value)
        for axis, coordinate, direct in ((POSITION, "q", position_density), (MOMENTUM, "p", momentum_density)):
            x, density = marginal(fields[WIGNER_QUANTUM], axis)
            columns = {coordinate: x, "wigner_quantum": density, "direct": direct(state, x)}
            if WIGNER_FVR in fields:
                columns["wigner_fvr_postnorm"] = marginal(post_normalize(fields[WIGNER_FVR]), axis).density
            path = self.config.output_dir / f"marginal_{axis}_{time.tag}.csv"
            GridWriter.write_csv(path, columns)
            self._record(MARGINALS, path, time, axis=axis)

    def caustics(self) -> None:
        config = self.config
        x = config.caustic_point
        for time in config.times:
            field = caustic_det_map(x, time.value, config.chord_grid, config.dynamics)
            path = config.output_dir / f"{CAUSTIC_MAP}_{time.tag}.wgr"
            GridWriter.write(field, path)
            radius = min(abs(config.chord_grid.q_min), config.chord_grid.q_max,
                         abs(config.chord_grid.p_min), config.chord_grid.p_max)
            self._record(CAUSTIC_MAP, path, time, x_final=[x.q, x.p],
                         zero_contours=count_zero_contours(field, mask_radius=radius))
            image = config.output_dir / f"{CAUSTIC_MAP}_{time.tag}.png"
            FieldViewer.render_heatmap(field, image, DisplayConfig(
                title=f"det, x' = ({x.q:g}, {x.p:g}), t = {time.label}"))
            self._record(CAUSTIC_MAP, image, time, source=CAUSTIC_MAP)

    def autocorr(self) -> None:
        config = self.config
        times = np.array([t.value for t in config.times])
        initial = Field.from_function(config.grid, lambda z: wigner0(config.state, z))
        semiclassical = []
        for time in config.times:
            logger.info("Autocorrelation at t = %s", time.label)
            semiclassical.append(autocorr_overlap(post_normalize(self._field(WIGNER_FVR, time)), initial))
        path = config.output_dir / "autocorr.csv"
        GridWriter.write_csv(path, {"t": times, "A2_quantum": autocorr_exact(self.fock, times),
                                    "A2_fvr_postnorm": semiclassical})
        self._record(AUTOCORR, path, n_times=len(times))

    def run(self, command: Optional[str] = None) -> int:
        config = self.config
        outputs = list(config.outputs)
        if command is not None:
            outputs = [k for k in outputs if k in COMMAND_OUTPUTS[command]]
            if not any(k != FRAMES for k in outputs):
                outputs.append(COMMAND_DEFAULT[command])
        config.output_dir.mkdir(parents=True, exist_ok=True)

        if any(k in outputs for k in FIELD_OUTPUTS + (MARGINALS,)):
            self.evolve(outputs)
        if CAUSTIC_MAP in outputs:
            self.caustics()
        if AUTOCORR in outputs:
            self.autocorr()

        manifest = config.output_dir / "manifest.json"
        GridWriter.write_manifest(manifest, config.to_dict(), self.artifacts)
        if self.n_unconverged:
            message = f"{self.n_unconverged} quadrature nodes did not converge"
            if not self.allow_unconverged:
                raise ConvergenceError(message, self.n_unconverged)
            logger.warning("%s; continuing because unconverged output is allowed", message)
        return EXIT_OK


def run(config: RunConfig, command: Optional[str] = None, allow_unconverged: bool = False) -> int:
    config.validate()
    return Runner(config, allow_unconverged).run(command)


def _load_config(args) -> RunConfig:
    if args.config and args.recipe:
        raise ConfigError("", "use either --config or --recipe, not both")
    if args.config:
        config = RunConfig.load(args.config)
    elif args.recipe:
        config = RunConfig.recipe(args.recipe)
    else:
        config = RunConfig()
    if args.out is not None:
        config.output_dir = Path(args.out)
    if args.workers is not None:
        config.workers = args.workers
    config.validate()
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerr-fvr",
                                     description="Semiclassical Wigner propagation for the Kerr oscillator")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, text in (("evolve", "Wigner fields at each configured time"),
                       ("caustics", "chord-determinant maps and their zero contours"),
                       ("autocorr", "quantum and semiclassical autocorrelation curves")):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("--config", type=Path, help="JSON run configuration")
        sub.add_argument("--recipe", help="built-in figure recipe: fig1, fig3, fig3_caustics, fig4, fig5")
        sub.add_argument("--out", type=Path, help="output directory")
        sub.add_argument("--workers", type=int, help="worker processes for semiclassical fields")
        sub.add_argument("--allow-unconverged", action="store_true",
                         help="exit 0 even when quadrature nodes fail the convergence check")

    render = commands.add_parser("render", help="heatmap images from grid files")
    render.add_argument("files", nargs="+", type=Path)
    render.add_argument("--out", type=Path, help="output directory (default: next to each file)")
    render.add_argument("--hbar-square", action="store_true", help="draw a square of area hbar")
    render.add_argument("--no-contours", action="store_true", help="omit the zero contour")

    verify = commands.add_parser("verify", help="run the acceptance checks")
    verify.add_argument("--quick", action="store_true", help="reduced resolutions")
    verify.add_argument("--check", action="append", choices=list(CHECKS), help="run only these checks")
    verify.add_argument("--workers", type=int, default=1)
    return parser


def _render(args) -> int:
    for path in args.files:
        field = GridReader.parse(path)
        target_dir = args.out or path.parent
        target_dir.mkdir(parents=True, exist_ok=True)
        FieldViewer.render_heatmap(field, target_dir / f"{path.stem}.png", DisplayConfig(
            show_hbar_square=args.hbar_square, show_contours=not args.no_contours, title=path.stem))
    return EXIT_OK


def _verify(args) -> int:
    results = run_checks(args.check, quick=args.quick, workers=args.workers)
    for result in results:
        print(result.summary())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="[%(module)-12s] %(message)s",
                        level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        if args.command == "render":
            return _render(args)
        if args.command == "verify":
            return _verify(args)
        return run(_load_config(args), args.command, args.allow_unconverged)
    except ConfigError as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG
    except TruncationError as e:
        logger.error("Invalid configuration: truncation: %s", e)
        return EXIT_CONFIG
    except ConvergenceError as e:
        logger.error("%s (use --allow-unconverged to accept)", e)
        return EXIT_UNCONVERGED
    except GridFileError as e:
        logger.error("%s", e)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
