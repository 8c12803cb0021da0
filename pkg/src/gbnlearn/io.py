"""On-disk formats: data CSV and edge-list model files.

Data files are headerless CSV, one sample per row, every float written
with %.17g so values round-trip exactly.

Model files are plain text: ``# key = value`` header lines followed by
one ``child,parent,weight`` line per edge, sorted by (child, parent).
Required headers are ``p`` and ``sigma2`` (a single value, or a
comma-separated per-node list for unequal-variance models); readers keep
unknown headers in ``meta`` so learner diagnostics (lambda, order, ...)
survive a round-trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gbnlearn.errors import DataFormatError
from gbnlearn.model import Dag, Gbn


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_data_csv(path, x) -> None:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DataFormatError(f"data must be 2-D, got shape {x.shape}")
    with open(path, "w") as fh:
        for row in x:
            fh.write(",".join(_fmt(v) for v in row))
            fh.write("\n")


def read_data_csv(path) -> np.ndarray:
    rows = []
    width = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width == -1:
                width = len(parts)
            elif len(parts) != width:
                raise DataFormatError(
                    f"{path}: row {lineno} has {len(parts)} columns, expected {width}"
                )
            try:
                rows.append([float(v) for v in parts])
            except ValueError as e:
                raise DataFormatError(f"{path}: row {lineno}: {e}") from e
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class ModelFile:
    """Parsed model file: node count, variances, weighted edges, extras."""

    p: int
    sigma2: np.ndarray
    edges: dict  # (child, parent) -> weight
    meta: dict = field(default_factory=dict)

    def to_gbn(self) -> Gbn:
        b = np.zeros((self.p, self.p))
        for (child, parent), w in self.edges.items():
            b[child, parent] = w
        return Gbn(
            dag=Dag(p=self.p, edges=frozenset(self.edges)), b=b, sigma2=self.sigma2
        )


def write_model_file(path, p: int, sigma2, edges: dict, meta: dict | None = None) -> None:
    """``edges`` maps (child, parent) to weight; ``meta`` adds header lines."""
    s2 = np.atleast_1d(np.asarray(sigma2, dtype=np.float64))
    if s2.shape == (1,):
        s2 = np.full(p, s2[0])
    if s2.shape != (p,):
        raise DataFormatError(f"sigma2 has shape {s2.shape}, expected ({p},)")
    with open(path, "w") as fh:
        fh.write(f"# p = {p}\n")
        if np.all(s2 == s2[0]):
            fh.write(f"# sigma2 = {_fmt(s2[0])}\n")
        else:
            fh.write(f"# sigma2 = {','.join(_fmt(v) for v in s2)}\n")
        for key, value in (meta or {}).items():
            fh.write(f"# {key} = {value}\n")
        for child, parent in sorted(edges):
            fh.write(f"{child},{parent},{_fmt(edges[(child, parent)])}\n")


def read_model_file(path) -> ModelFile:
    headers = {}
    edges = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise DataFormatError(
                        f"{path}: row {lineno}: header without '=': {line!r}"
                    )
                key, _, value = body.partition("=")
                headers[key.strip()] = value.strip()
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise DataFormatError(
                    f"{path}: row {lineno}: expected child,parent,weight, got {line!r}"
                )
            try:
                child, parent, w = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as e:
                raise DataFormatError(f"{path}: row {lineno}: {e}") from e
            if (child, parent) in edges:
                raise DataFormatError(f"{path}: row {lineno}: duplicate edge")
            edges[(child, parent)] = w
    if "p" not in headers:
        raise DataFormatError(f"{path}: missing '# p = N' header")
    if "sigma2" not in headers:
        raise DataFormatError(f"{path}: missing '# sigma2 = ...' header")
    try:
        p = int(headers.pop("p"))
        sigma2 = np.array([float(v) for v in headers.pop("sigma2").split(",")])
    except ValueError as e:
        raise DataFormatError(f"{path}: bad header value: {e}") from e
    if sigma2.shape == (1,):
        sigma2 = np.full(p, sigma2[0])
    if sigma2.shape != (p,):
        raise DataFormatError(
            f"{path}: sigma2 lists {sigma2.shape[0]} values for p = {p}"
        )
    for child, parent in edges:
        if not (0 <= child < p and 0 <= parent < p) or child == parent:
            raise DataFormatError(f"{path}: edge ({child}, {parent}) invalid for p = {p}")
    return ModelFile(p=p, sigma2=sigma2, edges=edges, meta=headers)


def model_file_from_gbn(g: Gbn) -> dict:
    """Edge dict for `write_model_file` from a Gbn."""
    return {(c, par): float(g.b[c, par]) for c, par in g.dag.edges}
