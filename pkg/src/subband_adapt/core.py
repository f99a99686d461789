"""The GPtNSAF engine and its special cases.

Notation follows the usual subband adaptive filtering conventions:

* ``L`` adaptive taps ``s(n)``, input vector ``u(n) = [u(n) ... u(n-L+1)]``;
* ``U(n)`` is the L x N matrix ``[u(n) ... u(n-N+1)]``;
* an N x M analysis bank ``H`` gives the subband quantities
  ``U_b = U H`` and ``e_b = H^T e`` with ``e(n) = d(n) - U^T(n) s(n)``;
* ``W(n) = diag(w)`` is the proportionate matrix built from ``s(n)``.

One update is performed per input sample (no decimation):

    s(n+1) = (1 - a) s(n) + W U_b Phi (a U_b^T s(n) + mu e_b)

with ``Phi = [(delta + tau) I_M + U_b^T W U_b]^{-1}`` and
``a = mu tau / (delta + tau)``. For ``tau = 0`` this is exactly
``s(n) + mu g(n)``, ``g = W U_b [delta I + U_b^T W U_b]^{-1} e_b``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidConfig, InvalidSparsityParam, ValidationError
from .filterbank import AnalysisBank, design_bank
from .linalg import CholeskySolver, weighted_gram

__all__ = [
    "Variant",
    "PNorm",
    "Identity",
    "ProportionateWeights",
    "UpdateParams",
    "SubbandFrame",
    "FilterConfig",
    "FilterState",
    "AdaptiveFilter",
    "proportionate_weights",
    "compute_fullband_error",
    "subband_decompose",
    "gptnsaf_direction",
    "regularized_update",
    "configure_special_case",
    "SUGGESTED_P",
]

DEFAULT_C = 1e-3
DEFAULT_DELTA = 1e-6

# sparsity exponent suggested per target class
SUGGESTED_P = {"quasi-sparse": 1.5, "sparse": 1.2, "dispersive": 1.8}


class Variant(str, enum.Enum):
    GPTNSAF = "gptnsaf"
    PTAPA = "ptapa"
    NSAF = "nsaf"
    PTNLMS = "ptnlms"
    NLMS = "nlms"

    @classmethod
    def parse(cls, text):
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise InvalidConfig(f"unknown variant {text!r}") from None


@dataclass(frozen=True, eq=False)
class ProportionateWeights:
    """Diagonal of W(n)."""

    w: np.ndarray
    p: float
    c: float


def _check_sparsity(p, c):
    if not 1.0 <= p <= 2.0:
        raise InvalidSparsityParam(f"p must lie in [1.0, 2.0], got {p}")
    if not c > 0:
        raise InvalidSparsityParam(f"c must be positive, got {c}")


def proportionate_weights(s, p, c=DEFAULT_C):
    """w_i = (|s_i| + c)^(2 - p). ``p == 2`` returns exact ones."""
    _check_sparsity(p, c)
    s = np.asarray(s, dtype=np.float64)
    if p == 2.0:
        return ProportionateWeights(np.ones(s.shape), 2.0, c)
    return ProportionateWeights((np.abs(s) + c) ** (2.0 - p), p, c)


@dataclass(frozen=True)
class PNorm:
    """Sparsity-promoting weighting with exponent ``p`` and floor ``c``."""

    p: float
    c: float = DEFAULT_C

    def __post_init__(self):
        _check_sparsity(self.p, self.c)

    def weights(self, s):
        return proportionate_weights(s, self.p, self.c)

    @property
    def is_identity(self):
        return self.p == 2.0


@dataclass(frozen=True)
class Identity:
    """W(n) = I."""

    c: float = DEFAULT_C
    p = 2.0

    def weights(self, s):
        return ProportionateWeights(np.ones(np.shape(s)), 2.0, self.c)

    @property
    def is_identity(self):
        return True


@dataclass(frozen=True)
class UpdateParams:
    mu: float
    delta: float = DEFAULT_DELTA
    tau: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValidationError(f"step size mu must be > 0, got {self.mu}")
        if not self.delta > 0:
            raise ValidationError(f"delta must be > 0, got {self.delta}")
        if not self.tau >= 0:
            raise ValidationError(f"tau must be >= 0, got {self.tau}")


@dataclass(frozen=True, eq=False)
class SubbandFrame:
    u_b: np.ndarray  # L x M
    e_b: np.ndarray  # M


def _is_fullband(bank):
    return bank.num_bands == 1 and bank.filter_len == 1


def _is_identity_bank(bank):
    h = bank.h
    return h.shape[0] == h.shape[1] and np.array_equal(h, np.eye(h.shape[0]))


@dataclass(frozen=True)
class FilterConfig:
    length: int
    bank: AnalysisBank
    params: UpdateParams
    weighting: PNorm | Identity = field(default_factory=Identity)
    variant: Variant = Variant.GPTNSAF

    def __post_init__(self):
        if self.length < 1:
            raise InvalidConfig("filter length must be positive")
        if self.length < self.bank.num_bands:
            raise InvalidConfig(
                f"L >= M violated: L={self.length}, M={self.bank.num_bands}"
            )
        v = self.variant
        if v in (Variant.NLMS, Variant.PTNLMS) and not _is_fullband(self.bank):
            raise InvalidConfig(f"{v.value} requires M = N = 1")
        if v in (Variant.NLMS, Variant.NSAF) and not self.weighting.is_identity:
            raise InvalidConfig(f"{v.value} requires identity weighting")
        if v is Variant.PTAPA and not _is_identity_bank(self.bank):
            raise InvalidConfig("ptapa requires the identity analysis bank H = I")

    @property
    def num_bands(self):
        return self.bank.num_bands

    @property
    def filter_len(self):
        return self.bank.filter_len


def configure_special_case(variant, length, bank=None, p=None, params=None, *, c=DEFAULT_C):
    """Build a :class:`FilterConfig` for one member of the family.

    ``bank`` may be an :class:`AnalysisBank`, a band count (a designed
    pseudo-QMF bank for nsaf/gptnsaf, ``H = I`` for ptapa) or None for the
    fullband variants. ``params`` defaults to ``mu = 0.2 / M``.
    """
    variant = Variant.parse(variant) if not isinstance(variant, Variant) else variant
    if variant in (Variant.NLMS, Variant.PTNLMS):
        if bank is None:
            bank = AnalysisBank.fullband()
        elif isinstance(bank, int):
            if bank != 1:
                raise InvalidConfig(f"{variant.value} requires M = N = 1, got M={bank}")
            bank = AnalysisBank.fullband()
    elif bank is None:
        raise InvalidConfig(f"{variant.value} needs an analysis bank")
    elif isinstance(bank, int):
        bank = AnalysisBank.identity(bank) if variant is Variant.PTAPA else design_bank(bank)

    if variant in (Variant.NLMS, Variant.NSAF):
        if p is not None and p != 2.0:
            raise InvalidConfig(f"{variant.value} uses W = I; got p={p}")
        weighting = Identity(c)
    elif p is None:
        if variant is Variant.PTAPA:
            weighting = Identity(c)
        else:
            raise InvalidConfig(f"{variant.value} needs a sparsity exponent p")
    else:
        weighting = PNorm(p, c)

    if params is None:
        params = UpdateParams(mu=0.2 / bank.num_bands)
    return FilterConfig(length, bank, params, weighting, variant)


class FilterState:
    """Taps plus zero-initialized input and desired histories.

    ``input_history[k]`` holds u(n-k) for k < L+N-1 and
    ``desired_history[k]`` holds d(n-k) for k < N.
    """

    def __init__(self, length, filter_len):
        self.taps = np.zeros(length)
        self.input_history = np.zeros(length + filter_len - 1)
        self.desired_history = np.zeros(filter_len)
        self.n = 0

    @property
    def length(self):
        return self.taps.size

    @property
    def filter_len(self):
        return self.desired_history.size

    def push(self, u, d):
        self.input_history[1:] = self.input_history[:-1]
        self.input_history[0] = u
        self.desired_history[1:] = self.desired_history[:-1]
        self.desired_history[0] = d

    @property
    def input_vector(self):
        return self.input_history[: self.length]

    @property
    def input_matrix(self):
        """U(n), L x N (a read-only view into the history)."""
        return sliding_window_view(self.input_history, self.length).T


def compute_fullband_error(state):
    """e(n) = d(n) - U^T(n) s(n), all N entries with the current taps."""
    return state.desired_history - state.input_matrix.T @ state.taps


def subband_decompose(state, e, bank):
    h = bank.h
    return SubbandFrame(state.input_matrix @ h, h.T @ e)


def gptnsaf_direction(frame, w, delta, solver=None):
    """g(n) = W U_b [delta I + U_b^T W U_b]^{-1} e_b, via one Cholesky solve."""
    weights = w.w if isinstance(w, ProportionateWeights) else np.asarray(w)
    if solver is None:
        solver = CholeskySolver(frame.u_b.shape[1])
    gram = weighted_gram(frame.u_b, weights, delta)
    y = solver.solve(gram, frame.e_b)
    return weights * (frame.u_b @ y)


def regularized_update(taps, frame, w, params, solver=None):
    """s(n+1) from the damped regularized Newton step with weighted-norm penalty.

    With ``params.tau == 0`` the result is ``taps + mu * gptnsaf_direction``.
    """
    if params.tau == 0.0:
        return taps + params.mu * gptnsaf_direction(frame, w, params.delta, solver)
    weights = w.w if isinstance(w, ProportionateWeights) else np.asarray(w)
    if solver is None:
        solver = CholeskySolver(frame.u_b.shape[1])
    ridge = params.delta + params.tau
    shrink = params.mu * params.tau / ridge
    gram = weighted_gram(frame.u_b, weights, ridge)
    rhs = params.mu * frame.e_b + shrink * (frame.u_b.T @ taps)
    y = solver.solve(gram, rhs)
    return (1.0 - shrink) * taps + weights * (frame.u_b @ y)


class AdaptiveFilter:
    """Sample-by-sample GPtNSAF.

    Examples
    --------
    >>> cfg = configure_special_case("nlms", 4, params=UpdateParams(mu=0.5))
    >>> f = AdaptiveFilter(cfg)
    >>> f.step(1.0, 0.5)
    0.5
    """

    def __init__(self, config):
        self.config = config
        self.state = FilterState(config.length, config.filter_len)
        self.weights = config.weighting.weights(self.state.taps)
        self._solver = CholeskySolver(config.num_bands)

    @property
    def taps(self):
        return self.state.taps

    @property
    def n(self):
        return self.state.n

    def reset(self):
        self.state = FilterState(self.config.length, self.config.filter_len)
        self.weights = self.config.weighting.weights(self.state.taps)

    def push(self, input_sample, desired_sample):
        """Feed one sample into the histories without adapting."""
        self.state.push(input_sample, desired_sample)

    def step(self, input_sample, desired_sample):
        """One iteration; returns the a priori fullband error e(n)."""
        cfg = self.config
        st = self.state
        st.push(input_sample, desired_sample)
        e = compute_fullband_error(st)
        frame = subband_decompose(st, e, cfg.bank)
        self.weights = cfg.weighting.weights(st.taps)
        st.taps = regularized_update(st.taps, frame, self.weights, cfg.params, self._solver)
        st.n += 1
        return float(e[0])

    def run(self, inputs, desired):
        inputs = np.asarray(inputs, dtype=np.float64)
        desired = np.asarray(desired, dtype=np.float64)
        return np.array([self.step(u, d) for u, d in zip(inputs, desired)])
