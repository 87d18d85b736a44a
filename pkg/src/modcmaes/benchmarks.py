"""Noiseless test problems for fixed-target benchmarking.

A representative ten-function suite standing in for the usual noiseless
benchmark collection: every function is minimized, shifted to a seeded
optimum ``x_opt`` with value offset ``f_opt``, optionally rotated, and
reported as error ``f(x) - f_opt`` against a target precision of 1e-8
inside the box [-5, 5]^D.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Problem",
    "FUNCTIONS",
    "SUBGROUPS",
    "DIMENSIONS",
    "subgroup_of",
    "make_problem",
    "make_suite",
    "suite_manifest",
    "default_budget",
]

DIMENSIONS = (2, 3, 5, 10, 20)

SUBGROUPS = (
    "separable",
    "low_moderate_conditioning",
    "high_conditioning_unimodal",
    "multimodal_adequate",
    "multimodal_weak",
)

DEFAULT_TARGET = 1e-8
LOWER, UPPER = -5.0, 5.0


def default_budget(dimension: int) -> int:
    """Standard per-run evaluation budget: 1000 * D."""
    return 1000 * dimension


def _sphere(z: np.ndarray, aux: dict) -> float:
    return float(z @ z)


def _ellipsoid(z: np.ndarray, aux: dict) -> float:
    d = len(z)
    if d == 1:
        return float(1e6 * z[0] ** 2)
    coeff = 10.0 ** (6.0 * np.arange(d) / (d - 1))
    return float(coeff @ (z * z))


def _rastrigin(z: np.ndarray, aux: dict) -> float:
    return float(10.0 * (len(z) - np.sum(np.cos(2.0 * np.pi * z))) + z @ z)


def _attractive_sector(z: np.ndarray, aux: dict) -> float:
    s = np.where(z > 0.0, 100.0, 1.0)
    return float(np.sum((s * z) ** 2))


def _rosenbrock(z: np.ndarray, aux: dict) -> float:
    w = z + 1.0
    return float(
        np.sum(100.0 * (w[:-1] ** 2 - w[1:]) ** 2 + (w[:-1] - 1.0) ** 2)
    )


def _discus(z: np.ndarray, aux: dict) -> float:
    return float(1e6 * z[0] ** 2 + np.sum(z[1:] ** 2))


def _schaffers(z: np.ndarray, aux: dict) -> float:
    s = np.sqrt(z[:-1] ** 2 + z[1:] ** 2)
    inner = np.sqrt(s) * (1.0 + np.sin(50.0 * s**0.2) ** 2)
    return float((np.sum(inner) / (len(z) - 1)) ** 2)


def _gallagher(z: np.ndarray, aux: dict) -> float:
    centers = aux["centers"]  # (n_peaks, D); row 0 is the origin
    heights = aux["heights"]  # row 0 has height 10.0
    scales = aux["scales"]  # (n_peaks, D) diagonal quadratic forms
    diff = z[None, :] - centers
    expo = np.sum(scales * diff * diff, axis=1) / (2.0 * len(z))
    best = np.max(heights * np.exp(-expo))
    return float((10.0 - best) ** 2)


@dataclass(frozen=True)
class _FunctionDef:
    raw: Callable[[np.ndarray, dict], float]
    subgroup: str
    rotated: bool
    make_aux: Callable[[int, np.random.Generator], dict] | None = None


def _gallagher_aux(dimension: int, rng: np.random.Generator) -> dict:
    n_peaks = 21
    centers = rng.uniform(-4.0, 4.0, size=(n_peaks, dimension))
    centers[0] = 0.0
    heights = np.concatenate(([10.0], rng.uniform(1.1, 9.5, size=n_peaks - 1)))
    conditions = 10.0 ** rng.uniform(0.0, 2.0, size=(n_peaks, dimension))
    return {"centers": centers, "heights": heights, "scales": conditions}


FUNCTIONS: dict[str, _FunctionDef] = {
    "sphere": _FunctionDef(_sphere, "separable", rotated=False),
    "ellipsoid_separable": _FunctionDef(_ellipsoid, "separable", rotated=False),
    "rastrigin_separable": _FunctionDef(_rastrigin, "separable", rotated=False),
    "attractive_sector": _FunctionDef(
        _attractive_sector, "low_moderate_conditioning", rotated=True
    ),
    "rosenbrock_rotated": _FunctionDef(
        _rosenbrock, "low_moderate_conditioning", rotated=True
    ),
    "ellipsoid_rotated": _FunctionDef(
        _ellipsoid, "high_conditioning_unimodal", rotated=True
    ),
    "discus": _FunctionDef(_discus, "high_conditioning_unimodal", rotated=True),
    "rastrigin_rotated": _FunctionDef(
        _rastrigin, "multimodal_adequate", rotated=True
    ),
    "schaffers": _FunctionDef(_schaffers, "multimodal_adequate", rotated=True),
    "gallagher": _FunctionDef(
        _gallagher, "multimodal_weak", rotated=False, make_aux=_gallagher_aux
    ),
}


def subgroup_of(function_id: str) -> str:
    return FUNCTIONS[function_id].subgroup


def _random_rotation(dimension: int, rng: np.random.Generator) -> np.ndarray:
    m = rng.standard_normal((dimension, dimension))
    q, r = np.linalg.qr(m)
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class Problem:
    """One shifted/rotated minimization problem on [-5, 5]^D."""

    function_id: str
    dimension: int
    subgroup: str
    x_opt: np.ndarray
    f_opt: float
    rotation: np.ndarray
    seed: int
    target_precision: float = DEFAULT_TARGET
    aux: dict = field(default_factory=dict)

    @property
    def lower(self) -> np.ndarray:
        return np.full(self.dimension, LOWER)

    @property
    def upper(self) -> np.ndarray:
        return np.full(self.dimension, UPPER)

    def evaluate(self, x: np.ndarray) -> float:
        """Raw function value at ``x`` (already includes ``f_opt``)."""
        return self.error(x) + self.f_opt

    def error(self, x: np.ndarray) -> float:
        """Nonnegative optimality gap ``f(x) - f_opt``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"expected shape ({self.dimension},), got {x.shape}"
            )
        z = self.rotation.T @ (x - self.x_opt)
        return FUNCTIONS[self.function_id].raw(z, self.aux)


def make_problem(
    function_id: str, dimension: int, seed: int | None = None
) -> Problem:
    """Instantiate one problem; ``seed=None`` derives a stable default.

    The default instance seed is a CRC of ``"<function>/<dim>"`` so that
    every process asking for, say, sphere in 5-D gets the identical
    shifted instance.
    """
    if function_id not in FUNCTIONS:
        raise KeyError(
            f"unknown function {function_id!r}; known: {sorted(FUNCTIONS)}"
        )
    if dimension not in DIMENSIONS:
        raise ValueError(f"dimension must be one of {DIMENSIONS}")
    if seed is None:
        seed = zlib.crc32(f"{function_id}/{dimension}".encode())
    fdef = FUNCTIONS[function_id]
    rng = np.random.default_rng(seed)
    x_opt = rng.uniform(-4.0, 4.0, size=dimension)
    f_opt = float(np.round(rng.uniform(-100.0, 100.0), 2))
    rotation = (
        _random_rotation(dimension, rng) if fdef.rotated else np.eye(dimension)
    )
    aux = fdef.make_aux(dimension, rng) if fdef.make_aux else {}
    return Problem(
        function_id=function_id,
        dimension=dimension,
        subgroup=fdef.subgroup,
        x_opt=x_opt,
        f_opt=f_opt,
        rotation=rotation,
        seed=seed,
        aux=aux,
    )


def make_suite(seed: int = 0) -> list[Problem]:
    """All ten functions in all five dimensions, seeded per problem."""
    suite = []
    for fid in FUNCTIONS:
        for dim in DIMENSIONS:
            suite.append(make_problem(fid, dim, seed=seed * 100003 + zlib.crc32(f"{fid}/{dim}".encode())))
    return suite


def suite_manifest(suite: list[Problem]) -> str:
    """Line-delimited table: function_id, dimension, subgroup, seed."""
    lines = ["function_id\tdimension\tsubgroup\tseed"]
    for p in suite:
        lines.append(f"{p.function_id}\t{p.dimension}\t{p.subgroup}\t{p.seed}")
    return "\n".join(lines) + "\n"
