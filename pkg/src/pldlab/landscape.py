"""2-D loss surfaces over random orthonormal directions in logit space.

A slice fixes a unit-norm anchor point t (also used as the teacher logits),
two orthonormal directions d1 and d2, and evaluates a loss at the student
logits s(a, b) = t + a*d1 + b*d2 over a square grid.  The label for
label-dependent losses is argmax(t) (first index on ties), which makes the
teacher-optimal ranking exactly the descending sort of t.

Conventions for the baselines on the slice: kd and dist are evaluated as
pure distillation terms (no cross-entropy mix), and dist treats each grid
point as a batch of one row, so only its inter-class term is active.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lab.io import atomic_write_text
from .losses import ce_loss, dist_loss, kd_loss, pld_loss
from .numerics import make_rng

__all__ = [
    "SliceSpec",
    "SliceGrid",
    "SLICE_LOSS_KINDS",
    "SLICE_CSV_HEADER",
    "point_loss",
    "make_slice",
    "temperature_sweep",
    "line_convexity_probe",
    "slice_to_csv",
    "write_slice_csv",
]

SLICE_LOSS_KINDS = ("pld", "kd", "dist", "ce")
SLICE_CSV_HEADER = "alpha,beta,loss_kind,temperature,value"

_GRAM_SCHMIDT_TOL = 1e-8
_GRAM_SCHMIDT_RETRIES = 8


@dataclass(frozen=True)
class SliceSpec:
    n_classes: int = 100
    resolution: int = 41
    span: float = 5.0
    temperatures: tuple = (2.0, 1.0, 0.5, 0.1)
    loss_kinds: tuple = ("pld", "kd", "dist")
    seed: int = 0

    def validate(self) -> "SliceSpec":
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.resolution < 3:
            raise ValueError("grid resolution must be at least 3")
        if not self.span > 0:
            raise ValueError("span must be positive")
        if not self.temperatures or any(t <= 0 for t in self.temperatures):
            raise ValueError("temperatures must be positive")
        bad = [k for k in self.loss_kinds if k not in SLICE_LOSS_KINDS]
        if bad or not self.loss_kinds:
            raise ValueError(f"unsupported slice loss kinds: {bad}")
        return self


@dataclass(frozen=True)
class SliceGrid:
    spec: SliceSpec
    alphas: np.ndarray
    betas: np.ndarray
    anchor: np.ndarray  # unit-norm teacher logits t
    d1: np.ndarray
    d2: np.ndarray
    label: int
    values: dict = field(default_factory=dict)  # (loss_kind, temperature) -> R x R


def _draw_directions(rng: np.random.Generator, v: int):
    """Unit anchor plus two Gram-Schmidt-orthonormalized random directions."""
    t = rng.standard_normal(v)
    norm = np.linalg.norm(t)
    for _ in range(_GRAM_SCHMIDT_RETRIES):
        if norm > _GRAM_SCHMIDT_TOL:
            break
        t = rng.standard_normal(v)
        norm = np.linalg.norm(t)
    else:
        raise RuntimeError("could not draw a usable anchor vector")
    t = t / norm

    def orthonormal_to(basis):
        for _ in range(_GRAM_SCHMIDT_RETRIES):
            d = rng.standard_normal(v)
            for b in basis:
                d = d - (d @ b) * b
            norm = np.linalg.norm(d)
            if norm > _GRAM_SCHMIDT_TOL:
                return d / norm
        raise RuntimeError("Gram-Schmidt failed to produce an orthonormal direction")

    d1 = orthonormal_to([])
    d2 = orthonormal_to([d1])
    return t, d1, d2


def point_loss(kind: str, s: np.ndarray, t: np.ndarray, y: int, temperature: float) -> float:
    """One loss value at a single point of the slice."""
    s2 = s[None, :]
    t2 = t[None, :]
    labels = [int(y)]
    if kind == "pld":
        return pld_loss(s2, t2, labels, tau_T=temperature).loss
    if kind == "kd":
        return kd_loss(s2, t2, labels, alpha=0.0, tau=temperature).loss
    if kind == "dist":
        return dist_loss(s2, t2, labels, alpha=0.0, beta=1.0, gamma=0.0, tau=temperature).loss
    if kind == "ce":
        return ce_loss(s2, labels).loss
    raise ValueError(f"unsupported slice loss kind {kind!r}")


def make_slice(spec: SliceSpec) -> SliceGrid:
    """Evaluate every configured (loss, temperature) pair over the grid."""
    spec = spec.validate()
    rng = make_rng(spec.seed)
    t, d1, d2 = _draw_directions(rng, spec.n_classes)
    half = spec.span * float(np.linalg.norm(t))  # == span: t has unit norm
    coords = np.linspace(-half, half, spec.resolution)
    y = int(np.argmax(t))
    values = {}
    for kind in spec.loss_kinds:
        for temp in spec.temperatures:
            grid = np.empty((spec.resolution, spec.resolution))
            for i, a in enumerate(coords):
                base = t + a * d1
                for j, b in enumerate(coords):
                    grid[i, j] = point_loss(kind, base + b * d2, t, y, temp)
            values[(kind, float(temp))] = grid
    return SliceGrid(
        spec=spec, alphas=coords, betas=coords.copy(),
        anchor=t, d1=d1, d2=d2, label=y, values=values,
    )


def temperature_sweep(spec: SliceSpec) -> list:
    """One single-temperature grid per configured temperature, sharing the
    anchor and directions (same seed, same slice plane)."""
    grid = make_slice(spec)
    out = []
    for temp in spec.temperatures:
        sub = {
            (kind, float(temp)): grid.values[(kind, float(temp))]
            for kind in spec.loss_kinds
        }
        out.append(
            SliceGrid(
                spec=spec, alphas=grid.alphas, betas=grid.betas,
                anchor=grid.anchor, d1=grid.d1, d2=grid.d2,
                label=grid.label, values=sub,
            )
        )
    return out


def line_convexity_probe(
    kind: str,
    spec: SliceSpec,
    trials: int,
    temperature: float = 1.0,
    tolerance: float = 1e-9,
) -> int:
    """Count violations of L(lam*p + (1-lam)*q) <= lam*L(p) + (1-lam)*L(q).

    p and q are random points on the slice plane, lam is uniform on (0, 1).
    A convex loss restricted to the plane (an affine subspace of logit
    space) must give zero violations up to the tolerance.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    spec = spec.validate()
    rng = make_rng(spec.seed)
    t, d1, d2 = _draw_directions(rng, spec.n_classes)
    y = int(np.argmax(t))
    half = spec.span

    def at(ab):
        return point_loss(kind, t + ab[0] * d1 + ab[1] * d2, t, y, temperature)

    violations = 0
    for _ in range(trials):
        p = rng.uniform(-half, half, size=2)
        q = rng.uniform(-half, half, size=2)
        lam = rng.uniform(0.0, 1.0)
        mid = at(lam * p + (1.0 - lam) * q)
        if mid > lam * at(p) + (1.0 - lam) * at(q) + tolerance:
            violations += 1
    return violations


def slice_to_csv(grid: SliceGrid) -> str:
    """Deterministic CSV: loss kinds, then temperatures, then row-major grid."""
    lines = [SLICE_CSV_HEADER]
    for kind in grid.spec.loss_kinds:
        for temp in grid.spec.temperatures:
            key = (kind, float(temp))
            if key not in grid.values:
                continue
            vals = grid.values[key]
            for i, a in enumerate(grid.alphas):
                for j, b in enumerate(grid.betas):
                    lines.append(
                        f"{float(a)!r},{float(b)!r},{kind},{float(temp)!r},{float(vals[i, j])!r}"
                    )
    return "\n".join(lines) + "\n"


def write_slice_csv(grid: SliceGrid, path) -> None:
    atomic_write_text(path, slice_to_csv(grid))
