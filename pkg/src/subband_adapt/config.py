"""Sectioned ``key = value`` experiment files.

Example::

    [target]
    kind = sparse

    [filter]
    variant = gptnsaf
    M = 8
    p = 1.2
    mu = auto        # 0.2 / M

    [input]
    rho = 0.9
    burn_in = 2000

    [noise]
    variance = 1e-3

    [run]
    runs = 100
    samples = 20000
    seed = 42

Several ``key=value`` pairs may share a line when they contain no spaces.
Unknown sections and keys are errors. Command-line overrides use
``section.key=value`` and win over the file.
"""

from pathlib import Path

from .core import SUGGESTED_P, UpdateParams, Variant, configure_special_case
from .errors import InvalidConfig, ParseError, ValidationError
from .filterbank import DEFAULT_FILTER_LENGTHS, AnalysisBank, design_bank
from .signals import Ar1Config, NoiseConfig, TargetKind, load_target_csv
from .sim import ExperimentConfig, TargetSpec

__all__ = ["KNOWN_KEYS", "parse_config", "parse_text", "build_experiment"]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    return None if text.strip().lower() == "auto" else float(text)


def _opt_int(text):
    return None if text.strip().lower() in ("auto", "none") else int(text)


KNOWN_KEYS = {
    "target": {
        "kind": str,
        "nonzeros": int,
        "decay": float,
        "seed": _opt_int,
        "file": str,
        "per_run": _bool,
    },
    "filter": {
        "variant": str,
        "L": int,
        "M": int,
        "N": _opt_int,
        "p": _opt_float,
        "c": float,
        "mu": _opt_float,
        "delta": float,
        "tau": float,
    },
    "input": {"rho": float, "burn_in": int, "unit_power": _bool},
    "noise": {"variance": float},
    "run": {"runs": int, "samples": int, "seed": int},
}

DEFAULTS = {
    "target.kind": "sparse",
    "target.nonzeros": 8,
    "target.decay": 32.0,
    "target.seed": None,
    "target.file": None,
    "target.per_run": False,
    "filter.variant": "gptnsaf",
    "filter.L": 256,
    "filter.M": None,
    "filter.N": None,
    "filter.p": None,
    "filter.c": 1e-3,
    "filter.mu": None,
    "filter.delta": 1e-6,
    "filter.tau": 0.0,
    "input.rho": 0.9,
    "input.burn_in": 2000,
    "input.unit_power": True,
    "noise.variance": 1e-3,
    "run.runs": 100,
    "run.samples": 20000,
    "run.seed": 42,
}


def _convert(section, key, text, lineno, source):
    if section not in KNOWN_KEYS:
        raise ParseError(f"unknown section [{section}]", lineno, source)
    conv = KNOWN_KEYS[section].get(key)
    if conv is None:
        raise ParseError(f"unknown key {key!r} in [{section}]", lineno, source)
    try:
        return conv(text.strip())
    except ValueError as exc:
        raise ParseError(f"bad value for {section}.{key}: {exc}", lineno, source) from None


def _pairs(body, lineno, source):
    body = body.strip()
    if not body:
        return []
    if body.count("=") > 1:
        tokens = body.split()
    else:
        tokens = [body]
    pairs = []
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"expected key = value, got {tok!r}", lineno, source)
        pairs.append((key.strip(), value.strip()))
    return pairs


def parse_text(text, source=None):
    """Parse config text into a flat ``{"section.key": value}`` dict."""
    values = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            close = line.find("]")
            if close < 0:
                raise ParseError("unterminated section header", lineno, source)
            section = line[1:close].strip().lower()
            if section not in KNOWN_KEYS:
                raise ParseError(f"unknown section [{section}]", lineno, source)
            line = line[close + 1:]
        for key, value in _pairs(line, lineno, source):
            if section is None:
                raise ParseError("key outside of any [section]", lineno, source)
            values[f"{section}.{key}"] = _convert(section, key, value, lineno, source)
    return values


def _parse_override(text):
    name, sep, value = text.partition("=")
    section, dot, key = name.strip().partition(".")
    if not sep or not dot:
        raise ParseError(f"override must look like section.key=value, got {text!r}")
    return f"{section.lower()}.{key}", _convert(section.lower(), key, value, None, "override")


def build_experiment(values):
    """Turn a flat dict (defaults filled in) into a validated ExperimentConfig."""
    v = dict(DEFAULTS)
    v.update(values)
    variant = Variant.parse(v["filter.variant"])

    if v["target.file"] is not None:
        target = load_target_csv(v["target.file"])
        spec = TargetSpec(TargetKind.CUSTOM, taps=target.taps)
    else:
        spec = TargetSpec(
            TargetKind.parse(v["target.kind"]),
            nonzeros=v["target.nonzeros"],
            decay=v["target.decay"],
            seed=v["target.seed"],
        )

    fullband = variant in (Variant.NLMS, Variant.PTNLMS)
    M = v["filter.M"]
    if M is None:
        M = 1 if fullband else 8
    N = v["filter.N"]
    if M < 1:
        raise InvalidConfig(f"M must be positive, got {M}")
    if v["filter.L"] < M:
        raise InvalidConfig(f"L >= M violated: L={v['filter.L']}, M={M}")

    if fullband:
        if M != 1 or (N is not None and N != 1):
            raise InvalidConfig(f"{variant.value} requires M = N = 1, got M={M}")
        bank = AnalysisBank.fullband()
    elif variant is Variant.PTAPA:
        if N is not None and N != M:
            raise InvalidConfig(f"ptapa uses H = I, so N must equal M (got N={N}, M={M})")
        bank = AnalysisBank.identity(M)
    else:
        if N is None and M not in DEFAULT_FILTER_LENGTHS:
            raise InvalidConfig(f"no default analysis filter length for M={M}; set filter.N")
        bank = design_bank(M, N)

    p = v["filter.p"]
    if p is None and variant in (Variant.GPTNSAF, Variant.PTNLMS):
        if spec.kind is TargetKind.CUSTOM:
            raise InvalidConfig(f"{variant.value} with a custom target needs filter.p")
        p = SUGGESTED_P[spec.kind.value]
    mu = v["filter.mu"]
    if mu is None:
        mu = 0.2 / M
    params = UpdateParams(mu=mu, delta=v["filter.delta"], tau=v["filter.tau"])
    filt = configure_special_case(variant, v["filter.L"], bank, p, params, c=v["filter.c"])

    variance = v["noise.variance"]
    if variance < 0:
        raise ValidationError(f"noise variance must be >= 0, got {variance}")
    return ExperimentConfig(
        target=spec,
        filter=filt,
        input=Ar1Config(rho=v["input.rho"], length=1, burn_in=v["input.burn_in"]),
        noise=NoiseConfig(variance) if variance > 0 else None,
        num_runs=v["run.runs"],
        num_samples=v["run.samples"],
        master_seed=v["run.seed"],
        new_target_per_run=v["target.per_run"],
        unit_power_input=v["input.unit_power"],
    )


def parse_config(path=None, overrides=()):
    """Read ``path`` (may be None), apply ``overrides``, validate.

    Raises
    ------
    ParseError
        Syntax problems and unknown keys, with the line number.
    ValidationError
        A well-formed config that violates an invariant (e.g. L < M).
    """
    values = {}
    if path is not None:
        values.update(parse_text(Path(path).read_text(), source=str(path)))
    for item in overrides:
        key, value = _parse_override(item)
        values[key] = value
    return build_experiment(values)
