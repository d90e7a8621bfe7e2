"""Sub-Nyquist measurement operators (digital emulation of an AIC front end).

Three operator kinds are supported:

``selection``
    Random non-uniform subsampling: ``M`` distinct rows of ``I_N``. Stored as
    an index array, never as a dense matrix. Rows are kept in time order.
``gaussian``
    Dense i.i.d. ``N(0, 1/M)`` entries, so ``E||Phi v||^2 = ||v||^2``.
``bernoulli``
    Dense i.i.d. ``+-1/sqrt(N)`` entries with probability 1/2 each.

:class:`SensingMap` composes an operator with the unitary inverse DFT,
``A = Phi F^{-1}``, mapping a spectrum vector to measurements.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

__all__ = [
    "KINDS",
    "MeasurementOperator",
    "SensingMap",
    "estimate_operator_norm",
    "estimate_rip_constant",
    "make_operator",
    "measure",
    "sensing_map",
]

KINDS = ("selection", "gaussian", "bernoulli")


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    kind: str
    m: int
    n: int
    rows: np.ndarray | None = None
    matrix: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.kind == "selection":
            rows = np.asarray(self.rows, dtype=np.intp)
            if rows.shape != (self.m,):
                raise ValueError(f"selection operator needs {self.m} row indices")
            if len(np.unique(rows)) != self.m or rows.min() < 0 or rows.max() >= self.n:
                raise ValueError("selection rows must be distinct indices in [0, n)")
            rows.setflags(write=False)
            object.__setattr__(self, "rows", rows)
        else:
            mat = np.asarray(self.matrix, dtype=float)
            if mat.shape != (self.m, self.n):
                raise ValueError(f"matrix shape {mat.shape} != ({self.m}, {self.n})")
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``Phi @ x`` along the first axis."""
        if x.shape[0] != self.n:
            raise ValueError(f"operator expects length {self.n}, got {x.shape[0]}")
        if self.kind == "selection":
            return x[self.rows]
        return self.matrix @ x

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """``Phi^T @ y`` along the first axis."""
        if y.shape[0] != self.m:
            raise ValueError(f"operator adjoint expects length {self.m}, got {y.shape[0]}")
        if self.kind == "selection":
            out = np.zeros((self.n,) + y.shape[1:], dtype=y.dtype)
            out[self.rows] = y
            return out
        return self.matrix.T @ y

    def dense(self) -> np.ndarray:
        if self.kind == "selection":
            mat = np.zeros((self.m, self.n))
            mat[np.arange(self.m), self.rows] = 1.0
            return mat
        return np.array(self.matrix)


def make_operator(kind: str, m: int, n: int, seed=None) -> MeasurementOperator:
    """Draw a random measurement operator; deterministic for a given seed."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    if kind == "selection":
        # first M entries of a random permutation, in time order
        rows = np.sort(rng.permutation(n)[:m])
        return MeasurementOperator(kind, m, n, rows=rows, seed=seed)
    if kind == "gaussian":
        mat = rng.standard_normal((m, n)) / np.sqrt(m)
        return MeasurementOperator(kind, m, n, matrix=mat, seed=seed)
    if kind == "bernoulli":
        mat = rng.choice(np.array([-1.0, 1.0]), size=(m, n)) / np.sqrt(n)
        return MeasurementOperator(kind, m, n, matrix=mat, seed=seed)
    raise ValueError(f"unknown operator kind {kind!r}; expected one of {KINDS}")


def measure(op: MeasurementOperator, x) -> np.ndarray:
    """Compressed measurements ``y = Phi x`` of a time signal (or raw array)."""
    samples = getattr(x, "samples", x)
    samples = np.asarray(samples)
    if samples.ndim != 1:
        raise ValueError("measure expects a 1-D signal")
    return op.apply(samples)


@dataclass(frozen=True, eq=False)
class SensingMap:
    """Linear map ``A = Phi F^{-1}`` from spectrum to measurements."""

    op: MeasurementOperator

    @property
    def shape(self) -> tuple[int, int]:
        return (self.op.m, self.op.n)

    @property
    def tight_frame(self) -> bool:
        """True when ``A A^H = I`` exactly (row selection of a unitary matrix)."""
        return self.op.kind == "selection"

    def forward(self, r: np.ndarray) -> np.ndarray:
        return self.op.apply(np.fft.ifft(r, axis=0, norm="ortho"))

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return np.fft.fft(self.op.adjoint(np.asarray(y, dtype=complex)), axis=0, norm="ortho")

    __matmul__ = forward

    def dense(self) -> np.ndarray:
        """Explicit ``M x N`` complex matrix."""
        return np.fft.ifft(self.op.dense(), axis=1, norm="ortho")

    @cached_property
    def _row_gram_factor(self):
        # A A^H = Phi Phi^T because F^{-1} is unitary
        phi = self.op.matrix
        return scipy.linalg.cho_factor(phi @ phi.T)

    @cached_property
    def _shifted_gram_factor(self):
        phi = self.op.matrix
        return scipy.linalg.cho_factor(np.eye(self.op.m) + phi @ phi.T)

    def solve_row_gram(self, v: np.ndarray) -> np.ndarray:
        """``(A A^H)^{-1} v``."""
        if self.tight_frame:
            return v
        return scipy.linalg.cho_solve(self._row_gram_factor, v)

    def solve_shifted(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``x = (I + A^H A)^{-1} b`` together with ``A x``.

        Woodbury: with ``t = (I + A A^H)^{-1} A b`` we get ``x = b - A^H t``
        and ``A x = t``.
        """
        ab = self.forward(b)
        if self.tight_frame:
            t = 0.5 * ab
        else:
            t = scipy.linalg.cho_solve(self._shifted_gram_factor, ab)
        return b - self.adjoint(t), t

    def least_norm_correction(self, delta: np.ndarray) -> np.ndarray:
        """Smallest ``d`` with ``A d = delta``."""
        return self.adjoint(self.solve_row_gram(delta))


def sensing_map(op: MeasurementOperator, n_bins: int) -> SensingMap:
    if op.n != n_bins:
        raise ValueError(f"operator acts on length {op.n}, spectrum has {n_bins} bins")
    return SensingMap(op)


def estimate_operator_norm(A: SensingMap, iters: int = 200, seed=0, tol: float = 1e-12) -> float:
    """Largest singular value of `A` by power iteration on ``A^H A``."""
    rng = np.random.default_rng(seed)
    n = A.shape[1]
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.adjoint(A.forward(v))
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        if abs(nrm - est) <= tol * nrm:
            est = nrm
            break
        est = nrm
    return float(np.sqrt(est))


def estimate_rip_constant(
    op: MeasurementOperator,
    s: int,
    trials: int,
    seed=None,
    batch: int = 1024,
) -> float:
    """Monte Carlo *lower bound* on the restricted isometry constant.

    Returns ``max |‖Phi v‖² - 1|`` over `trials` random unit-norm `s`-sparse
    real vectors ``v`` (uniform support, Gaussian values). The true constant
    is a maximum over all supports and can only be larger.
    """
    if not 1 <= s <= op.m:
        raise ValueError(f"need 1 <= s <= m, got s={s}, m={op.m}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        support = np.argsort(rng.random((b, op.n)), axis=1)[:, :s]
        vals = rng.standard_normal((b, s))
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)
        v = np.zeros((op.n, b))
        v[support.T, np.arange(b)] = vals.T
        energy = np.sum(op.apply(v) ** 2, axis=0)
        worst = max(worst, float(np.max(np.abs(energy - 1.0))))
        done += b
    return worst
