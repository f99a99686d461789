"""Cosine-modulated pseudo-QMF analysis banks.

The prototype is a Kaiser-windowed ideal lowpass. For a given window shape
the sinc cutoff is tuned so that neighbouring bands cross at half power,
which is what makes the modulated bank (nearly) power complementary.
"""

import csv
import functools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal.windows import kaiser

from .errors import InvalidBankSpec

__all__ = [
    "AnalysisBank",
    "BankReport",
    "DEFAULT_FILTER_LENGTHS",
    "design_prototype",
    "modulate",
    "validate_bank",
    "design_bank",
    "load_bank_csv",
]

# analysis filter length used for each band count in the experiments
DEFAULT_FILTER_LENGTHS = {1: 1, 2: 16, 4: 30, 8: 60}

GRID_POINTS = 4096
_BETA_GRID = np.arange(0.0, 12.01, 0.5)
_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class AnalysisBank:
    """N x M analysis filter matrix; column ``i`` is the filter for band ``i``."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64, copy=True)
        if h.ndim != 2 or h.size == 0:
            raise InvalidBankSpec(f"bank matrix must be 2-D and non-empty, got shape {h.shape}")
        if h.shape[1] == 1 and h.shape[0] == 1 and h[0, 0] != 1.0:
            raise InvalidBankSpec("a single-band bank must be the fullband identity [1]")
        if h.shape[1] == 1 and h.shape[0] != 1:
            raise InvalidBankSpec("a single-band bank must have filter length 1")
        norms = np.linalg.norm(h, axis=0)
        if np.any(np.abs(norms - 1.0) > _NORM_TOL):
            raise InvalidBankSpec(f"bank columns must have unit norm, got {norms}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def num_bands(self):
        return self.h.shape[1]

    @property
    def filter_len(self):
        return self.h.shape[0]

    @classmethod
    def fullband(cls):
        return cls(np.ones((1, 1)))

    @classmethod
    def identity(cls, num_bands):
        """H = I, which turns the subband update into an affine projection."""
        return cls(np.eye(num_bands))

    def to_csv(self, path):
        """Write taps as rows and bands as columns."""
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow([f"band{i + 1}" for i in range(self.num_bands)])
            for row in self.h:
                writer.writerow([repr(float(x)) for x in row])

    def __repr__(self):
        return f"AnalysisBank(M={self.num_bands}, N={self.filter_len})"


def load_bank_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return AnalysisBank(np.array([[float(x) for x in r] for r in rows[1:]]))


@dataclass(frozen=True)
class BankReport:
    power_complementarity_residual: float
    band_peak_frequencies: np.ndarray

    def passes(self, tol=0.05):
        return self.power_complementarity_residual <= tol


def _check_spec(num_bands, filter_len):
    if num_bands < 1 or filter_len < 1:
        raise InvalidBankSpec("num_bands and filter_len must be positive")
    if num_bands == 1 and filter_len != 1:
        raise InvalidBankSpec("the fullband case requires filter_len == 1")
    if num_bands >= 2 and filter_len < 4 * num_bands:
        raise InvalidBankSpec(
            f"filter_len={filter_len} too short for {num_bands} bands (need >= {4 * num_bands})"
        )


def _windowed_sinc(filter_len, cutoff, beta):
    k = np.arange(filter_len) - (filter_len - 1) / 2
    return cutoff / np.pi * np.sinc(cutoff * k / np.pi) * kaiser(filter_len, beta)


def _modulation_matrix(prototype, num_bands):
    n = len(prototype)
    k = np.arange(n) - (n - 1) / 2
    h = np.empty((n, num_bands))
    for i in range(1, num_bands + 1):
        phase = (2 * i - 1) * np.pi / (2 * num_bands) * k + (-1) ** i * np.pi / 4
        h[:, i - 1] = 2 * prototype * np.cos(phase)
    return h / np.linalg.norm(h, axis=0)


def _power_spectra(h):
    """|H_i(e^jw)|^2 on the validation grid, shape (GRID_POINTS, M)."""
    resp = np.fft.rfft(h, n=2 * GRID_POINTS, axis=0)[:GRID_POINTS]
    return np.abs(resp) ** 2


def _residual(h):
    total = _power_spectra(h).sum(axis=1)
    mean = total.mean()
    return float(np.max(np.abs(total - mean)) / mean)


@functools.lru_cache(maxsize=None)
def _design_cached(num_bands, filter_len):
    nominal = np.pi / (2 * num_bands)
    best = None
    for beta in _BETA_GRID:
        res = minimize_scalar(
            lambda wc: _residual(_modulation_matrix(_windowed_sinc(filter_len, wc, beta), num_bands)),
            bounds=(0.5 * nominal, 1.5 * nominal),
            method="bounded",
            options={"xatol": 1e-9},
        )
        if best is None or res.fun < best[0]:
            best = (res.fun, beta, res.x)
    _, beta, cutoff = best
    p = _windowed_sinc(filter_len, cutoff, beta)
    # enforce exact even symmetry
    p = 0.5 * (p + p[::-1])
    p.setflags(write=False)
    return p


def design_prototype(num_bands, filter_len):
    """Design the linear-phase lowpass prototype for an ``num_bands`` bank.

    The half-power point of the returned filter sits at pi/(2M). Kaiser
    ``beta`` is picked from a fixed grid and, for each ``beta``, the sinc
    cutoff is tuned by bounded scalar search; the pair with the smallest
    power-complementarity residual of the modulated bank wins.

    Raises
    ------
    InvalidBankSpec
        For ``(1, N != 1)`` or when ``filter_len < 4 * num_bands``.
    """
    _check_spec(num_bands, filter_len)
    if num_bands == 1:
        return np.ones(1)
    return _design_cached(num_bands, filter_len).copy()


def modulate(prototype, num_bands):
    """Cosine-modulate ``prototype`` into an ``num_bands`` analysis bank.

    h_i[k] = 2 p[k] cos((2i-1) pi/(2M) (k - (N-1)/2) + (-1)^i pi/4), then
    each column is scaled to unit norm. ``num_bands == 1`` always gives the
    fullband identity.
    """
    if num_bands < 1:
        raise InvalidBankSpec("num_bands must be positive")
    if num_bands == 1:
        return AnalysisBank.fullband()
    return AnalysisBank(_modulation_matrix(np.asarray(prototype, dtype=np.float64), num_bands))


def _band_center(power, grid):
    """Midpoint of the half-power region around the maximum; 0 if it spans the grid."""
    top = int(np.argmax(power))
    inside = power >= 0.5 * power[top]
    if inside.all():
        return 0.0
    lo = top
    while lo > 0 and inside[lo - 1]:
        lo -= 1
    hi = top
    while hi < len(power) - 1 and inside[hi + 1]:
        hi += 1
    return 0.5 * (grid[lo] + grid[hi])


def validate_bank(bank):
    """Power-complementarity residual and per-band peak frequencies.

    The residual is max_w |S(w) - mean S| / mean S with
    S(w) = sum_i |H_i(e^jw)|^2, evaluated on a 4096-point grid over [0, pi).
    Edge bands of a pseudo-QMF bank are flat over their whole passband, so
    a band's peak is reported as the center of its half-power passband
    rather than the raw argmax.
    """
    spectra = _power_spectra(bank.h)
    total = spectra.sum(axis=1)
    mean = total.mean()
    residual = float(np.max(np.abs(total - mean)) / mean)
    grid = np.arange(GRID_POINTS) * np.pi / GRID_POINTS
    peaks = np.sort([_band_center(spectra[:, i], grid) for i in range(bank.num_bands)])
    return BankReport(residual, peaks)


def design_bank(num_bands, filter_len=None):
    """Designed pseudo-QMF bank; ``filter_len`` defaults to the experiment pairing."""
    if filter_len is None:
        if num_bands not in DEFAULT_FILTER_LENGTHS:
            raise InvalidBankSpec(f"no default filter length for M={num_bands}; pass filter_len")
        filter_len = DEFAULT_FILTER_LENGTHS[num_bands]
    return modulate(design_prototype(num_bands, filter_len), num_bands)
