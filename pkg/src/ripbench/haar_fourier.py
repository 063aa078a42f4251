"""Closed-form Haar-wavelet Fourier coefficients, the truncation balancing
residual, and the minimal-frequency-count search.

Bases on [0, 1): Fourier exponentials phi_l(t) = e^{2 pi i l t} and the Haar
system psi_j, ordered scaling function first, then wavelets coarse to fine
(s = 0, 1, ...) with shifts k ascending; column j >= 1 carries (s, k) with
j = 2^s + k.  n must be a power of two so the columns form the full Haar
basis of resolution J = log2(n).

The inner product <phi_l, psi_j> = integral e^{-2 pi i l t} psi_j(t) dt has
the closed form 2^{-s/2} e^{-2 pi i l k / 2^s} W(l / 2^s) with
W(theta) = (1 - e^{-i pi theta})^2 / (2 pi i theta), W(0) = 0.

The balancing residual measures how much energy the first d frequencies lose
on Haar-sparse signals: || Re(U* U) - I ||_2 for the d x n coefficient block
U.  The real part suffices because Haar coordinate vectors are real.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "UBlock",
    "MinDResult",
    "frequency_order",
    "haar_index",
    "haar_fn",
    "haar_fourier_coeff",
    "build_u_block",
    "balancing_residual",
    "min_d_for_eps",
    "spectral_norm_sym",
    "ublock_to_csv",
    "min_d_to_json",
]


def frequency_order(d_freq: int) -> list:
    """Frequencies low to high: 0, 1, -1, 2, -2, ..."""
    if d_freq < 1:
        raise ValueError("need d_freq >= 1")
    out = [0]
    l = 1
    while len(out) < d_freq:
        out.append(l)
        if len(out) < d_freq:
            out.append(-l)
        l += 1
    return out


def haar_index(j: int):
    """Column index to Haar label: 0 is the scaling function, j = 2^s + k the
    (scale s, shift k) wavelet."""
    if j < 0:
        raise ValueError("need j >= 0")
    if j == 0:
        return None
    s = j.bit_length() - 1
    k = j - (1 << s)
    return s, k


def haar_fn(j: int, t: np.ndarray) -> np.ndarray:
    """Pointwise evaluation of Haar column j on [0, 1)."""
    t = np.asarray(t, dtype=float)
    label = haar_index(j)
    if label is None:
        return np.where((t >= 0.0) & (t < 1.0), 1.0, 0.0)
    s, k = label
    u = (2.0**s) * t - k
    out = np.zeros_like(t)
    out[(u >= 0.0) & (u < 0.5)] = 1.0
    out[(u >= 0.5) & (u < 1.0)] = -1.0
    return (2.0 ** (s / 2.0)) * out


def _w_profile(theta: float) -> complex:
    if theta == 0.0:
        return 0.0 + 0.0j
    z = 1.0 - cmath.exp(-1j * math.pi * theta)
    return z * z / (2j * math.pi * theta)


def haar_fourier_coeff(l: int, j: int) -> complex:
    """<phi_l, psi_j> in closed form."""
    label = haar_index(j)
    if label is None:
        return 1.0 + 0.0j if l == 0 else 0.0 + 0.0j
    s, k = label
    if not (0 <= k < 2**s):
        raise ValueError("need 0 <= k < 2^s")
    phase = cmath.exp(-2j * math.pi * l * k / (2**s))
    return (2.0 ** (-s / 2.0)) * phase * _w_profile(l / (2**s))


@dataclass(frozen=True)
class UBlock:
    """d_freq x n block of <phi_l, psi_j> with its frequency ordering."""

    entries: np.ndarray
    freq_order: tuple
    n: int


def build_u_block(d_freq: int, n: int) -> UBlock:
    # power-of-two n only: columns must form a complete Haar resolution
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"n must be a power of two, got {n}")
    freqs = frequency_order(d_freq)
    ls = np.asarray(freqs, dtype=float)
    entries = np.empty((d_freq, n), dtype=complex)
    entries[:, 0] = np.where(ls == 0.0, 1.0 + 0.0j, 0.0j)
    for j in range(1, n):
        s, k = haar_index(j)
        theta = ls / (2.0**s)
        z = 1.0 - np.exp(-1j * math.pi * theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(theta == 0.0, 0.0j, z * z / (2j * math.pi * np.where(theta == 0.0, 1.0, theta)))
        phase = np.exp(-2j * math.pi * ls * k / (2.0**s))
        entries[:, j] = (2.0 ** (-s / 2.0)) * phase * w
    return UBlock(entries=entries, freq_order=tuple(freqs), n=n)


def spectral_norm_sym(A: np.ndarray) -> float:
    """Largest absolute eigenvalue of a symmetric matrix.

    Symmetric QR iteration (LAPACK via eigvalsh), accurate to machine
    precision.  Power iteration was rejected here: its Rayleigh-ratio
    stopping rule stalls when the two extreme eigenvalues nearly tie in
    magnitude, and the Gram residuals this feeds on are small enough that
    a full eigendecomposition costs nothing.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def balancing_residual(u: UBlock) -> float:
    """|| Re(U* U) - I ||_2 for the truncated coefficient block."""
    G = (u.entries.conj().T @ u.entries).real
    return spectral_norm_sym(G - np.eye(u.n))


@dataclass(frozen=True)
class MinDResult:
    found: bool
    d: int | None
    residual: float
    n: int
    eps_star: float
    d_max: int


def min_d_for_eps(n: int, eps_star: float, d_max: int = 4096) -> MinDResult:
    """Smallest frequency count d with balancing residual <= eps_star.

    Linear scan in d: the residual is non-increasing because each added
    frequency adds a positive-semidefinite rank-one term to the real Gram,
    which is itself capped by the identity.  When even d_max fails, the
    result reports found=False with the residual at d_max.
    """
    if not (0.0 < eps_star < 1.0):
        raise ValueError("need eps_star in (0, 1)")
    if d_max < 1:
        raise ValueError("need d_max >= 1")
    block = build_u_block(d_max, n)
    eye = np.eye(n)
    G = np.zeros((n, n))
    resid = math.inf
    for d in range(1, d_max + 1):
        row = block.entries[d - 1]
        G = G + np.outer(row.conj(), row).real
        resid = spectral_norm_sym(G - eye)
        if resid <= eps_star:
            return MinDResult(True, d, resid, n, eps_star, d_max)
    return MinDResult(False, None, resid, n, eps_star, d_max)


def ublock_to_csv(u: UBlock) -> str:
    """One row per frequency; columns interleave Re and Im per Haar function."""
    head = ["freq"]
    for j in range(u.n):
        head += [f"re_{j}", f"im_{j}"]
    lines = [",".join(head)]
    for i, l in enumerate(u.freq_order):
        cells = [str(l)]
        for j in range(u.n):
            c = u.entries[i, j]
            cells += [f"{c.real:.17g}", f"{c.imag:.17g}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def min_d_to_json(res: MinDResult) -> str:
    payload = {"n": res.n, "eps_star": res.eps_star, "d": res.d}
    if not res.found:
        payload["error"] = "not_found"
        payload["residual_at_d_max"] = res.residual
        payload["d_max"] = res.d_max
    return json.dumps(payload)
