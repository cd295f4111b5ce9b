"""Sampled mother wavelets and the continuous wavelet transform.

Daubechies, Coiflet and Symmlet wavelets have no closed form, so the mother
wavelet is tabulated on a dyadic grid by the cascade algorithm: the scaling
function is first evaluated exactly at the integers (eigenvector of the
two-scale matrix) and then refined level by level, which reproduces the
exact values at every dyadic point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConfigError, InputError, ScaleError

# Orthonormal low-pass (scaling) filters, normalised to sum(h) = sqrt(2).
SCALING_FILTERS = {
    "db2": (
        0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037,
    ),
    "db4": (
        0.2303778133088965, 0.7148465705529157, 0.6308807679298589, -0.027983769416859854,
        -0.18703481171909309, 0.030841381835560764, 0.0328830116668852, -0.010597401785069032,
    ),
    "db5": (
        0.16010239797419293, 0.6038292697971896, 0.7243085284377729, 0.13842814590132074,
        -0.24229488706638203, -0.032244869584638375, 0.07757149384004572, -0.006241490212798274,
        -0.012580751999081999, 0.0033357252854737712,
    ),
    "coif4": (
        0.000892313902537003, -0.001629492425226786, -0.007346167936268051, 0.01606894713157503,
        0.02668230466960483, -0.08126671024919373, -0.05607731960356926, 0.41530842700068227,
        0.7822389344242826, 0.43438603311435653, -0.06662747236681717, -0.09622042453595264,
        0.03933442260558915, 0.02508225333794961, -0.015211728187697211, -0.0056582838001308835,
        0.0037514346971460866, 0.0012665610789256603, -0.0005890202246332165,
        -0.0002599743371222568, 6.233885431278719e-05, 3.1229861599195265e-05,
        -3.259647940030751e-06, -1.7849909144933469e-06,
    ),
    "sym8": (
        0.0018899503327594609, -0.0003029205147213668, -0.01495225833704823, 0.003808752013890615,
        0.049137179673607506, -0.027219029917056003, -0.05194583810770904, 0.3644418948353314,
        0.7771857517005235, 0.4813596512583722, -0.061273359067658524, -0.1432942383508097,
        0.007607487324917605, 0.03169508781149298, -0.0005421323317911481, -0.0033824159510061256,
    ),
}
WAVELETS = tuple(SCALING_FILTERS)

REFERENCE_FS = 200.0
REFERENCE_SCALES = (4.0, 10.0, 20.0, 30.0)
DEFAULT_WINDOW_S = 10.0


def scaling_filter(name: str) -> np.ndarray:
    try:
        return np.array(SCALING_FILTERS[name])
    except KeyError:
        raise ConfigError(f"unknown wavelet {name!r}; choose from {', '.join(WAVELETS)}") from None


def wavelet_filter(h: np.ndarray) -> np.ndarray:
    """Quadrature-mirror high-pass filter ``g[k] = (-1)^k h[N-1-k]``."""
    signs = np.where(np.arange(len(h)) % 2 == 0, 1.0, -1.0)
    return signs * h[::-1]


def _phi_at_integers(h: np.ndarray) -> np.ndarray:
    n = len(h)
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            k = 2 * i - j
            if 0 <= k < n:
                m[i, j] = math.sqrt(2.0) * h[k]
    vals, vecs = np.linalg.eig(m)
    idx = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, idx])
    return v / v.sum()


def _upsample(f: np.ndarray, step: int) -> np.ndarray:
    out = np.zeros((len(f) - 1) * step + 1)
    out[::step] = f
    return out


def cascade(h: np.ndarray, iterations: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scaling function and wavelet on the grid ``k / 2**iterations``.

    Returns ``(t, phi, psi)`` covering the support ``[0, len(h) - 1]``.
    """
    h = np.asarray(h, dtype=float)
    phi = _phi_at_integers(h)
    for i in range(iterations - 1):
        phi = math.sqrt(2.0) * np.convolve(phi, _upsample(h, 2**i))
    step = 2 ** (iterations - 1)
    psi = math.sqrt(2.0) * np.convolve(phi, _upsample(wavelet_filter(h), step))
    # one more refinement so phi shares psi's grid
    phi = math.sqrt(2.0) * np.convolve(phi, _upsample(h, step))
    t = np.arange(len(psi)) / 2.0**iterations
    return t, phi, psi


@dataclass(frozen=True, eq=False)
class WaveletTable:
    """Mother wavelet sampled on a dyadic grid in natural wavelet time."""

    name: str
    grid: np.ndarray
    values: np.ndarray

    @property
    def support(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def lobe_separation(self) -> float:
        """Distance in natural time between the largest positive and negative lobes."""
        return abs(float(self.grid[np.argmax(self.values)] - self.grid[np.argmin(self.values)]))


@lru_cache(maxsize=32)
def build_wavelet_table(name: str = "db2", cascade_iterations: int = 10) -> WaveletTable:
    """Tabulate ``psi`` for ``name`` with ``cascade_iterations`` refinements.

    The table is shifted to zero mean and scaled to unit L2 norm (Riemann
    sums on the grid).
    """
    h = scaling_filter(name)
    if int(cascade_iterations) != cascade_iterations or cascade_iterations < 6:
        raise ConfigError(f"cascade_iterations must be an integer >= 6, got {cascade_iterations!r}")
    t, _, psi = cascade(h, int(cascade_iterations))
    dt = t[1] - t[0]
    psi = psi - psi.mean()
    psi = psi / math.sqrt(np.sum(psi**2) * dt)
    t.flags.writeable = False
    psi.flags.writeable = False
    return WaveletTable(name, t, psi)


@dataclass(frozen=True, eq=False)
class ScaledKernel:
    """``(1/sqrt(a)) psi((t - center)/a)`` sampled at ``1/fs``.

    ``scale_a`` is measured in samples of the target rate; ``center`` is the
    kernel index aligned with the output position (the largest-magnitude
    sample).  The samples have zero sum and unit norm
    (``sum(samples**2) / fs == 1``).
    """

    scale_a: float
    fs: float
    samples: np.ndarray
    center: int
    wavelet: str = ""

    def __len__(self):
        return len(self.samples)

    @property
    def scale_s(self) -> float:
        return self.scale_a / self.fs


def scale_kernel(
    table: WaveletTable, scale_a: float, fs: float, max_duration_s: float = DEFAULT_WINDOW_S
) -> ScaledKernel:
    if not scale_a > 0:
        raise ScaleError(f"scale must be positive, got {scale_a!r}")
    if not fs > 0:
        raise ScaleError(f"sampling rate must be positive, got {fs!r}")
    lo, hi = table.support
    n = int(math.floor((hi - lo) * scale_a)) + 1
    if n > max_duration_s * fs:
        raise ScaleError(
            f"scale {scale_a} gives a {n}-sample kernel, longer than the "
            f"{max_duration_s:g} s window at {fs:g} Hz"
        )
    u = lo + np.arange(n) / scale_a
    k = np.interp(u, table.grid, table.values, left=0.0, right=0.0)
    # coarse sampling leaves a DC component and a norm off by up to a few tens
    # of percent at small scales; restore both properties of the continuous
    # (1/sqrt(a)) psi(t/a): zero mean and unit L2 norm under the 1/fs sum
    k = k - k.mean()
    energy = float(np.sum(k**2)) / fs
    if not energy > 0:
        raise ScaleError(f"scale {scale_a} is too small to resolve the {table.name} wavelet at {fs:g} Hz")
    k = k / math.sqrt(energy)
    k.flags.writeable = False
    return ScaledKernel(float(scale_a), float(fs), k, int(np.argmax(np.abs(k))), table.name)


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    scale_a: float
    coefficients: np.ndarray
    boundary: np.ndarray  # True where the kernel overlapped the zero padding

    def __len__(self):
        return len(self.coefficients)


def boundary_mask(n: int, kernel: ScaledKernel) -> np.ndarray:
    tau = np.arange(n)
    right = len(kernel) - 1 - kernel.center
    return (tau < kernel.center) | (tau + right > n - 1)


def cwt(segment, kernel: ScaledKernel) -> CoefficientVector:
    """CWT of ``segment`` at one scale.

    ``coef[tau] = sum_m x[tau - center + m] * kernel[m] / fs`` with zeros
    outside the segment.
    """
    x = np.asarray(segment, dtype=float)
    if x.ndim != 1:
        raise InputError(f"segment must be 1-D, got shape {x.shape}")
    m = len(kernel)
    if len(x) < m:
        raise InputError(f"segment of {len(x)} samples is shorter than the {m}-sample kernel")
    padded = np.concatenate([np.zeros(kernel.center), x, np.zeros(m - 1 - kernel.center)])
    coefs = np.correlate(padded, kernel.samples, mode="valid") / kernel.fs
    return CoefficientVector(kernel.scale_a, coefs, boundary_mask(len(x), kernel))


def select_scales(fs: float, reference=REFERENCE_SCALES) -> list[float]:
    """Reference scales (defined at 200 Hz) rescaled to ``fs``, rounded to whole samples."""
    return [float(max(1, round(a * fs / REFERENCE_FS))) for a in reference]
