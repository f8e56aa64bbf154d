"""Portable files for sampled fields, curves and run manifests.

Grid files (".wgr") hold a 45-byte little-endian header

    magic "WGR1" | u32 n_q | u32 n_p | f64 q_min, q_max, p_min, p_max | u8 kind

followed by f64 samples, row-major with p as the outer index running from
p_max down to p_min. kind 0 is real, kind 1 stores complex samples as
interleaved (re, im) pairs.
"""
import json
import logging
from pathlib import Path
from typing import Any, BinaryIO, Dict, List, Sequence, Union

import numpy as np

from .errors import GridFileError
from .phase_space import Field, Grid2D

logger = logging.getLogger(__name__)

MAGIC = b"WGR1"
REAL = 0
COMPLEX = 1

HEADER = np.dtype([
    ("magic", "S4"),
    ("n_q", "<u4"),
    ("n_p", "<u4"),
    ("extent", "<f8", (4,)),
    ("kind", "u1"),
])


class GridWriter:
    """Serializes fields, curves and manifests"""

    @staticmethod
    def write(field: Field, target: Union[str, Path, BinaryIO]) -> None:
        grid = field.grid
        header = np.zeros((), dtype=HEADER)
        header["magic"] = MAGIC
        header["n_q"] = grid.n_q
        header["n_p"] = grid.n_p
        header["extent"] = grid.extent
        header["kind"] = COMPLEX if field.is_complex else REAL
        payload = np.ascontiguousarray(field.values, dtype="<c16" if field.is_complex else "<f8")
        if isinstance(target, (str, Path)):
            with open(target, "wb") as f:
                f.write(header.tobytes())
                f.write(payload.tobytes())
            logger.info("Wrote grid file %s", target)
        else:
            target.write(header.tobytes())
            target.write(payload.tobytes())

    @staticmethod
    def write_csv(path: Union[str, Path], columns: Dict[str, Sequence[float]]) -> None:
        """Curves as columns with a header row, 17 significant digits"""
        names = list(columns)
        data = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
        logger.info("Wrote curve %s", path)

    @staticmethod
    def write_manifest(path: Union[str, Path], config: Dict[str, Any], artifacts: List[Dict[str, Any]]) -> None:
        with open(path, "w") as f:
            json.dump({"config": config, "artifacts": artifacts}, f, indent=2, sort_keys=True)
        logger.info("Wrote manifest %s with %d artifacts", path, len(artifacts))


class GridReader:
    """Parses files written by GridWriter"""

    @staticmethod
    def parse(source: Union[str, Path, BinaryIO]) -> Field:
        try:
            if isinstance(source, (str, Path)):
                if GridReader._guess_format(str(source)) != "wgr":
                    raise ValueError(f"'{source}' is not a grid file")
                with open(source, "rb") as f:
                    raw = f.read()
            else:
                raw = source.read()
            return GridReader._decode(raw)
        except Exception as e:
            raise GridFileError(f"Error parsing grid file: {e}")

    @staticmethod
    def _decode(raw: bytes) -> Field:
        if len(raw) < HEADER.itemsize:
            raise ValueError(f"file holds {len(raw)} bytes, shorter than the header")
        header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
        if header["magic"] != MAGIC:
            raise ValueError(f"bad magic {bytes(header['magic'])!r}")
        kind = int(header["kind"])
        if kind not in (REAL, COMPLEX):
            raise ValueError(f"unknown value kind {kind}")
        n_q, n_p = int(header["n_q"]), int(header["n_p"])
        q_min, q_max, p_min, p_max = (float(v) for v in header["extent"])
        dtype = np.dtype("<c16" if kind == COMPLEX else "<f8")
        expected = HEADER.itemsize + n_q * n_p * dtype.itemsize
        if len(raw) != expected:
            raise ValueError(f"expected {expected} bytes for a {n_q}x{n_p} grid, found {len(raw)}")
        values = np.frombuffer(raw, dtype=dtype, offset=HEADER.itemsize).reshape(n_p, n_q)
        return Field(Grid2D(q_min, q_max, p_min, p_max, n_q, n_p), values.astype(dtype.newbyteorder("=")))

    @staticmethod
    def read_csv(path: Union[str, Path]) -> Dict[str, np.ndarray]:
        try:
            with open(path) as f:
                names = f.readline().strip().split(",")
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except Exception as e:
            raise GridFileError(f"Error parsing curve file: {e}")
        return {name: data[:, i] for i, name in enumerate(names)}

    @staticmethod
    def _guess_format(filename: str) -> str:
        """Guess the file kind from its extension"""
        ext = filename.lower().split('.')[-1]
        format_map = {
            'wgr': 'wgr',
            'grid': 'wgr',
            'csv': 'csv',
            'json': 'manifest',
            'png': 'image',
        }
        return format_map.get(ext, 'wgr')
