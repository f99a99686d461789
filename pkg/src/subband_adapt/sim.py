"""Monte-Carlo system identification runs and MSE curves.

A run draws an AR(1) excitation, filters it through the target system and
adds white noise; the adaptive filter then identifies the target from
``(u, d)``. The burn-in samples are not adapted on; they serve as the
history of the first adapted sample, so ``n = 0`` sees stationary data.

Runs go through a compiled kernel that computes exactly the same update as
:class:`subband_adapt.core.AdaptiveFilter`, using the identities
``U_b(n)[k, i] = (h_i * u)(n - k)`` and ``e_b(n) = (H^T d)(n) - U_b^T s(n)``
so the subband signals are filtered once per run instead of per sample.
"""

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.signal import lfilter

from .core import FilterConfig
from .errors import NotPositiveDefinite, ValidationError
from .linalg import cholesky_inplace, cholesky_solve_inplace, weighted_gram_into
from .signals import (
    Ar1Config,
    NoiseConfig,
    TargetKind,
    TargetSystem,
    derive_seed,
    gen_ar1,
    gen_noise,
    gen_target,
)

__all__ = [
    "TargetSpec",
    "ExperimentConfig",
    "RunSignals",
    "MseCurve",
    "ConvergenceMetrics",
    "generate_run",
    "run_single",
    "run_ensemble",
    "convergence_metrics",
    "resolve_threads",
    "THREADS_ENV",
]

THREADS_ENV = "SUBBAND_ADAPT_THREADS"

STREAM_INPUT = 0
STREAM_NOISE = 1
STREAM_TARGET = 2
# spawn key of the target shared by all runs
_SHARED_TARGET_KEY = (1 << 32, STREAM_TARGET)


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """How the target IR is obtained: generated by kind, or given taps."""

    kind: TargetKind = TargetKind.SPARSE
    nonzeros: int = 8
    decay: float = 32.0
    seed: int | None = None
    taps: np.ndarray | None = None

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, TargetKind) else TargetKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is TargetKind.CUSTOM and self.taps is None:
            raise ValidationError("custom target requires taps")

    def build(self, length, seed):
        if self.taps is not None:
            return TargetSystem(TargetKind.CUSTOM, self.taps)
        return gen_target(self.kind, length, seed, nonzeros=self.nonzeros, decay=self.decay)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte-Carlo experiment.

    ``input`` and ``noise`` are templates: their ``length`` and ``seed``
    fields are replaced per run. ``noise=None`` gives noise-free data.
    With ``unit_power_input`` the AR(1) output is scaled by
    ``sqrt(1 - rho^2)`` so the excitation has unit variance.
    """

    target: TargetSpec
    filter: FilterConfig
    input: Ar1Config = field(default_factory=lambda: Ar1Config(rho=0.9, length=1, burn_in=2000))
    noise: NoiseConfig | None = field(default_factory=lambda: NoiseConfig(1e-3))
    num_runs: int = 100
    num_samples: int = 20000
    master_seed: int = 42
    new_target_per_run: bool = False
    unit_power_input: bool = True

    def __post_init__(self):
        if self.num_runs < 1:
            raise ValidationError("num_runs must be >= 1")
        need = self.filter.length + self.filter.filter_len
        if self.num_samples < need:
            raise ValidationError(
                f"num_samples >= L + N violated: {self.num_samples} < {need}"
            )

    def target_for_run(self, run_index):
        if self.target.seed is not None:
            seed = self.target.seed
        elif self.new_target_per_run:
            seed = derive_seed(self.master_seed, run_index, STREAM_TARGET)
        else:
            seed = derive_seed(self.master_seed, *_SHARED_TARGET_KEY)
        return self.target.build(self.filter.length, seed)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class RunSignals:
    """Signals of one run; adaptation starts at index ``start``."""

    u: np.ndarray
    d: np.ndarray
    target: TargetSystem
    start: int


def generate_run(cfg, run_index):
    """Deterministic signals for ``(cfg.master_seed, run_index)``."""
    length = cfg.filter.length
    burn_in = cfg.input.burn_in
    total = burn_in + cfg.num_samples
    u = gen_ar1(
        replace(
            cfg.input,
            length=total,
            burn_in=0,
            seed=derive_seed(cfg.master_seed, run_index, STREAM_INPUT),
        )
    )
    if cfg.unit_power_input:
        u = u * np.sqrt(1.0 - cfg.input.rho**2)
    target = cfg.target_for_run(run_index)
    d = lfilter(target.taps, [1.0], u)
    if cfg.noise is not None:
        noise = replace(cfg.noise, seed=derive_seed(cfg.master_seed, run_index, STREAM_NOISE))
        d = d + gen_noise(noise, total)
    # zero history ahead of the generated stream keeps every index in range
    pad = np.zeros(length - 1)
    return RunSignals(np.concatenate([pad, u]), np.concatenate([pad, d]), target, pad.size + burn_in)


@njit(cache=True, nogil=True)
def _adapt_kernel(u, d, xb, db, taps, w_on, p, c, mu, delta, tau, start, err2):
    """Adapt ``taps`` over ``u[start:]``; returns -1 or the failing sample index."""
    length = taps.shape[0]
    bands = xb.shape[0]
    ub = np.empty((length, bands))
    w = np.ones(length)
    gram = np.empty((bands, bands))
    y = np.empty(bands)
    ridge = delta + tau
    shrink = mu * tau / ridge
    expo = 2.0 - p
    for n in range(start, u.shape[0]):
        acc = 0.0
        for k in range(length):
            acc += u[n - k] * taps[k]
        e = d[n] - acc
        err2[n - start] = e * e
        for k in range(length):
            for i in range(bands):
                ub[k, i] = xb[i, n - k]
        if w_on:
            for k in range(length):
                w[k] = (abs(taps[k]) + c) ** expo
        for i in range(bands):
            acc = 0.0
            for k in range(length):
                acc += ub[k, i] * taps[k]
            if tau == 0.0:
                y[i] = db[i, n] - acc
            else:
                y[i] = mu * (db[i, n] - acc) + shrink * acc
        weighted_gram_into(ub, w, ridge, gram)
        if cholesky_inplace(gram) >= 0:
            return n
        cholesky_solve_inplace(gram, y)
        for k in range(length):
            acc = 0.0
            for i in range(bands):
                acc += ub[k, i] * y[i]
            if tau == 0.0:
                taps[k] = taps[k] + mu * (w[k] * acc)
            else:
                taps[k] = (1.0 - shrink) * taps[k] + w[k] * acc
    return -1


def adapt(filter_cfg, signals, taps=None):
    """Run the compiled engine over ``signals``; returns ``(e^2(n), final taps)``."""
    h = filter_cfg.bank.h
    u = np.ascontiguousarray(signals.u)
    d = np.ascontiguousarray(signals.d)
    if filter_cfg.num_bands == 1:
        xb = u[None, :] * h[0, 0]
        db = d[None, :] * h[0, 0]
    else:
        xb = np.stack([lfilter(h[:, i], [1.0], u) for i in range(h.shape[1])])
        db = np.stack([lfilter(h[:, i], [1.0], d) for i in range(h.shape[1])])
    if signals.start < filter_cfg.length - 1:
        raise ValidationError("signals need at least L - 1 samples of history")
    taps = np.zeros(filter_cfg.length) if taps is None else np.array(taps, dtype=np.float64)
    err2 = np.empty(u.size - signals.start)
    weighting = filter_cfg.weighting
    params = filter_cfg.params
    bad = _adapt_kernel(
        u, d, np.ascontiguousarray(xb), np.ascontiguousarray(db), taps,
        not weighting.is_identity, float(weighting.p), float(weighting.c),
        float(params.mu), float(params.delta), float(params.tau),
        signals.start, err2,
    )
    if bad >= 0:
        raise NotPositiveDefinite(
            f"subband correlation matrix not positive definite at sample {bad - signals.start}"
        )
    return err2, taps


def run_single(cfg, run_index):
    """Squared a priori fullband errors e^2(n), n = 0 .. num_samples-1."""
    err2, _ = adapt(cfg.filter, generate_run(cfg, run_index))
    return err2


@dataclass(frozen=True, eq=False)
class MseCurve:
    """Ensemble MSE in dB, normalized so that ``values_db[0] == 0``.

    ``reference`` is the linear ensemble MSE at n = 0 that was divided out;
    ``floor_db`` is the noise variance on the same scale.
    """

    values_db: np.ndarray
    floor_db: float
    reference: float = 1.0

    def __len__(self):
        return self.values_db.size

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            f.write("sample,mse_db\n")
            for i, v in enumerate(self.values_db):
                f.write(f"{i},{float(v)!r}\n")

    @classmethod
    def from_csv(cls, path, floor_db=float("nan")):
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        if rows[0] != ["sample", "mse_db"]:
            raise ValidationError(f"{path}: expected header 'sample,mse_db'")
        return cls(np.array([float(r[1]) for r in rows[1:]]), floor_db)


def _pairwise_sum(arrays):
    arrays = list(arrays)
    while len(arrays) > 1:
        merged = [arrays[i] + arrays[i + 1] for i in range(0, len(arrays) - 1, 2)]
        if len(arrays) % 2:
            merged.append(arrays[-1])
        arrays = merged
    return arrays[0]


def resolve_threads(threads=None):
    """Worker count from the argument, then ``SUBBAND_ADAPT_THREADS``, else 1.

    ``"auto"`` means one worker per CPU.
    """
    if threads is None:
        threads = os.environ.get(THREADS_ENV) or 1
    if isinstance(threads, str):
        if threads.strip().lower() == "auto":
            return os.cpu_count() or 1
        try:
            threads = int(threads)
        except ValueError:
            raise ValidationError(f"threads must be a positive integer or 'auto', got {threads!r}") from None
    if threads < 1:
        raise ValidationError(f"threads must be positive, got {threads}")
    return threads


def ensemble_mse(cfg, threads=None):
    """Linear ensemble-average of e^2(n) over runs, reduced in fixed order."""
    threads = resolve_threads(threads)
    indices = range(cfg.num_runs)
    if threads == 1:
        runs = [run_single(cfg, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(lambda i: run_single(cfg, i), indices))
    return _pairwise_sum(runs) / cfg.num_runs


def run_ensemble(cfg, threads=None):
    """Ensemble MSE curve, averaged in power and normalized to 0 dB at n = 0."""
    mse = ensemble_mse(cfg, threads)
    reference = float(mse[0])
    if not reference > 0 or not np.all(np.isfinite(mse)):
        raise FloatingPointError("ensemble MSE is zero at n = 0 or not finite; cannot normalize")
    with np.errstate(divide="raise"):
        values = 10.0 * np.log10(mse) - 10.0 * np.log10(reference)
    values[0] = 0.0
    noise = cfg.noise.variance if cfg.noise is not None else 0.0
    floor_db = 10.0 * np.log10(noise / reference) if noise > 0 else float("-inf")
    return MseCurve(values, floor_db, reference)


@dataclass(frozen=True)
class ConvergenceMetrics:
    samples_to_threshold: int | None
    terminal_db: float


def trailing_mean(values, window):
    """Mean of ``values[n-window+1 : n+1]`` for each full window, indexed by n."""
    csum = np.cumsum(np.concatenate([[0.0], values]))
    return (csum[window:] - csum[:-window]) / window


def convergence_metrics(curve, threshold_db, window=200):
    """Samples until the ``window``-sample trailing mean reaches ``threshold_db``.

    ``samples_to_threshold`` is the first index ``n`` whose trailing mean
    over ``values_db[n-window+1 .. n]`` is at or below the threshold, or
    None if it never is. ``terminal_db`` is the mean of the final 10%.
    """
    if not threshold_db < 0:
        raise ValidationError("threshold_db must be negative")
    values = curve.values_db if isinstance(curve, MseCurve) else np.asarray(curve)
    window = min(window, values.size)
    means = trailing_mean(values, window)
    hits = np.flatnonzero(means <= threshold_db)
    reached = int(hits[0]) + window - 1 if hits.size else None
    tail = max(1, values.size // 10)
    return ConvergenceMetrics(reached, float(np.mean(values[-tail:])))
