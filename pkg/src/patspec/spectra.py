"""Matrix realisations, eigenvalues, trace moments, histograms, and the
coupling-distance diagnostic.

Matrices are plain float64 numpy arrays; construction through the symmetric
link matrix makes them exactly (bitwise) symmetric.  The dense eigensolver is
LAPACK's symmetric driver via numpy (tridiagonalisation + implicitly shifted
iterations); the reverse circulant additionally has a closed-form spectrum
through the FFT, which doubles as an independent cross-check of the dense
path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .patterns import MatrixSpec, Pattern, input_base, input_length, link_matrix, mask_matrix

#: Relative tolerance for the eigenvalue-sum vs trace consistency check.
TRACE_TOL = 1e-9

#: Dense-path size guard; desk-scale experiments stay well below this.
NMAX_DENSE = 4096


def build_matrix(spec: MatrixSpec, inputs: np.ndarray) -> np.ndarray:
    """Dense realisation: entry (i, j) = inputs[link(i, j)] * keep(i, j)."""
    n = spec.n
    expected = input_length(spec.pattern, n)
    if len(inputs) != expected:
        raise ValueError(
            f"{spec.pattern.short} at n={n} needs {expected} inputs, got {len(inputs)}"
        )
    link = link_matrix(spec.pattern, n) - input_base(spec.pattern)
    a = np.asarray(inputs, dtype=float)[link]
    keep = mask_matrix(spec.mask, spec.pattern, n)
    if not keep.all():
        a = np.where(keep, a, 0.0)
    return a


def eigenvalues_sym(a: np.ndarray, tol: float = TRACE_TOL, vectors: bool = False):
    """All eigenvalues of a real symmetric matrix, ascending.

    Verifies the eigenvalue sum against the trace to tol * n * ||A||; a
    violation (or LAPACK non-convergence) raises ArithmeticError with the
    observed residual.  With ``vectors`` the (eigenvalues, eigenvectors)
    pair is returned after spot-checking ||A v - lambda v|| on sampled
    pairs against 1e4 * tol * ||A||.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > NMAX_DENSE:
        raise ValueError(f"dense solver capped at n={NMAX_DENSE}, got {n}")
    try:
        if vectors:
            eigs, vecs = np.linalg.eigh(a)
        else:
            eigs = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigensolver did not converge: {exc}") from exc
    scale = np.linalg.norm(eigs, ord=np.inf) if n else 0.0
    resid = abs(float(eigs.sum()) - float(np.trace(a)))
    if resid > tol * max(scale, 1e-300) * n:
        raise ArithmeticError(
            f"trace/eigenvalue-sum residual {resid:.3e} exceeds {tol:.1e} * n * ||A||"
        )
    if vectors:
        sample = range(0, n, max(1, n // 8))
        for idx in sample:
            r = float(np.linalg.norm(a @ vecs[:, idx] - eigs[idx] * vecs[:, idx]))
            if r > 1e4 * tol * max(scale, 1e-300):
                raise ArithmeticError(f"eigenpair residual {r:.3e} at index {idx}")
        return eigs, vecs
    return eigs


def rc_eigenvalues_fast(inputs: np.ndarray) -> np.ndarray:
    """Closed-form reverse-circulant spectrum, ascending.

    The spectrum consists of sum(x); for even n also the alternating sum;
    and +-|X_k| for the DFT values X_k, 1 <= k <= ceil(n/2) - 1.
    """
    x = np.asarray(inputs, dtype=float)
    n = len(x)
    if n < 1:
        raise ValueError("empty input sequence")
    dft = np.fft.rfft(x)
    eigs = [dft[0].real]
    if n % 2 == 0:
        eigs.append(dft[n // 2].real)
    mags = np.abs(dft[1 : (n + 1) // 2])
    out = np.concatenate([np.asarray(eigs), mags, -mags])
    out.sort()
    return out


def trace_moment(a: np.ndarray, k: int) -> float:
    """(1/n) Tr(A^k) through one symmetric eigendecomposition."""
    if k < 1:
        raise ValueError(f"moment order must be >= 1, got {k}")
    eigs = eigenvalues_sym(a)
    return float(np.mean(eigs**k))


def trace_moments_from_eigs(eigs: np.ndarray, kmax: int) -> np.ndarray:
    """(1/n) sum lambda^k for k = 1..kmax, as a 1-indexed array."""
    eigs = np.asarray(eigs, dtype=float)
    out = np.zeros(kmax + 1)
    powers = np.ones_like(eigs)
    for k in range(1, kmax + 1):
        powers = powers * eigs
        out[k] = float(np.mean(powers))
    return out


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray  # bins + 1 boundaries
    mass: np.ndarray  # normalised by the total count, including outliers
    below: float  # mass left of edges[0]
    above: float  # mass right of edges[-1]

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum()) + self.below + self.above

    def rows(self) -> list[tuple[float, float, float]]:
        """(bin_left, bin_right, mass) triples in bin order."""
        return [
            (float(self.edges[i]), float(self.edges[i + 1]), float(self.mass[i]))
            for i in range(len(self.mass))
        ]


def esd_histogram(
    eigs: np.ndarray, bins: int = 101, lim: tuple[float, float] | None = None
) -> Histogram:
    """Empirical spectral histogram with unit total mass.

    Out-of-range eigenvalues are reported in the below/above fields, never
    dropped silently.  Default range is [-L, L] with L = 1.05 max|lambda|.
    """
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        raise ValueError("empty eigenvalue list")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if lim is None:
        span = 1.05 * float(np.max(np.abs(eigs)))
        span = span if span > 0 else 1.0
        lim = (-span, span)
    lo, hi = lim
    if not hi > lo:
        raise ValueError(f"empty histogram range {lim}")
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(eigs, bins=edges)
    total = eigs.size
    below = float(np.count_nonzero(eigs < lo)) / total
    above = float(np.count_nonzero(eigs > hi)) / total
    return Histogram(edges=edges, mass=counts / total, below=below, above=above)


def d2_bound(a: np.ndarray, b: np.ndarray) -> float:
    """(1/n) Tr((A-B)^2): one realisation of the coupling-distance bound
    between the expected spectral measures; average over replicates to
    estimate the expectation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sum(diff * diff)) / a.shape[0]
