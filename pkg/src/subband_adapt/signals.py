"""Seeded excitation, system noise and target impulse responses.

All generators are pure functions of their config. Randomness comes from
numpy's PCG64 bit generator fed by a :class:`numpy.random.SeedSequence`;
per-run seeds are derived with :func:`derive_seed`, so a Monte-Carlo run
can be regenerated from ``(master_seed, run_index)`` alone.
"""

import csv
import enum
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidVariance, ValidationError

__all__ = [
    "Ar1Config",
    "NoiseConfig",
    "TargetKind",
    "TargetSystem",
    "derive_seed",
    "gen_ar1",
    "gen_noise",
    "gen_target",
    "load_target_csv",
]

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed, *key):
    """64-bit seed for the stream identified by ``key`` under ``master_seed``.

    Defined as the first 64-bit word of
    ``SeedSequence(master_seed, spawn_key=key)``, which is stable across
    platforms and numpy releases.
    """
    ss = np.random.SeedSequence(int(master_seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & _MASK64)))


@dataclass(frozen=True)
class Ar1Config:
    rho: float
    length: int
    burn_in: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ValidationError(f"AR(1) coefficient must satisfy |rho| < 1, got {self.rho}")
        if self.length < 1:
            raise ValidationError("length must be positive")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be non-negative")


def gen_ar1(cfg):
    """u(n) = rho u(n-1) + x(n) driven by unit-variance white Gaussian x(n).

    The first ``cfg.burn_in`` samples are generated and dropped.
    """
    x = _rng(cfg.seed).standard_normal(cfg.burn_in + cfg.length)
    if cfg.rho == 0.0:
        return x[cfg.burn_in:]
    return lfilter([1.0], [1.0, -cfg.rho], x)[cfg.burn_in:]


@dataclass(frozen=True)
class NoiseConfig:
    variance: float
    seed: int = 0

    def __post_init__(self):
        if not self.variance > 0:
            raise InvalidVariance(f"noise variance must be > 0, got {self.variance}")


def gen_noise(cfg, length):
    return np.sqrt(cfg.variance) * _rng(cfg.seed).standard_normal(length)


class TargetKind(str, enum.Enum):
    QUASI_SPARSE = "quasi-sparse"
    SPARSE = "sparse"
    DISPERSIVE = "dispersive"
    # loaded from file, no structural invariant
    CUSTOM = "custom"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower().replace("_", "-")
        if key in ("quasisparse", "quasi"):
            key = "quasi-sparse"
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown target kind {text!r}") from None


@dataclass(frozen=True, eq=False)
class TargetSystem:
    kind: TargetKind
    taps: np.ndarray

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64, copy=True).ravel()
        if taps.size == 0 or not np.all(np.isfinite(taps)):
            raise ValidationError("target taps must be a non-empty finite vector")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def length(self):
        return self.taps.size

    @property
    def energy(self):
        return float(self.taps @ self.taps)

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            for x in self.taps:
                f.write(repr(float(x)) + "\n")


def load_target_csv(path):
    """Read a single-column IR (optionally with a non-numeric header line)."""
    values = []
    with open(path, newline="") as f:
        for i, row in enumerate(csv.reader(f)):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if i == 0:
                    continue
                raise ValidationError(f"{path}:{i + 1}: not a number: {row[0]!r}") from None
    return TargetSystem(TargetKind.CUSTOM, np.array(values))


def gen_target(kind, length, seed, *, nonzeros=8, decay=32.0, head=8, energy=1.0):
    """Synthetic target IR of the given sparsity class, scaled to ``energy``.

    ``sparse``: ``nonzeros`` Gaussian taps at uniformly drawn positions.
    ``dispersive``: i.i.d. Gaussian taps.
    ``quasi-sparse``: Gaussian taps under an envelope that is flat for the
    first ``head`` taps and then decays as ``exp(-(k - head)/decay)``.
    """
    kind = TargetKind.parse(kind) if not isinstance(kind, TargetKind) else kind
    if length < 1:
        raise ValidationError("target length must be positive")
    rng = _rng(seed)
    if kind is TargetKind.DISPERSIVE:
        taps = rng.standard_normal(length)
    elif kind is TargetKind.SPARSE:
        if not 1 <= nonzeros <= length:
            raise ValidationError(f"nonzeros must be in [1, {length}], got {nonzeros}")
        taps = np.zeros(length)
        pos = rng.choice(length, size=nonzeros, replace=False)
        amp = rng.standard_normal(nonzeros)
        # a zero amplitude would break the nonzero count
        amp[amp == 0.0] = 1.0
        taps[pos] = amp
    elif kind is TargetKind.QUASI_SPARSE:
        k = np.arange(length)
        envelope = np.exp(-np.maximum(k - head, 0) / decay)
        taps = rng.standard_normal(length) * envelope
    else:
        raise ValidationError("custom targets are loaded, not generated")
    taps *= np.sqrt(energy / (taps @ taps))
    return TargetSystem(kind, taps)
