"""Experiment configuration: a small key=value format with [section]
blocks, parsed with full error collection.

Layout: common keys (model, seed, replications, out) at the top level,
model parameters in a section named after the model.  Full-line
comments start with '#'.  Validation reports every problem it finds,
each tagged with the line number it came from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .distributions import parse_distribution

MODEL_NAMES = (
    "gg1",
    "ggm",
    "jsq",
    "partial3",
    "greedy_circle",
    "annihilation",
    "polling",
    "polling_scan",
    "multiaccess",
)

MODEL_SUMMARIES = {
    "gg1": "single-server FIFO queue, waiting-time tails and means",
    "ggm": "m-server FIFO queue via the sorted workload vector",
    "jsq": "join-the-shortest-workload routing, memory probe",
    "partial3": "three servers, three customer classes with two-server access",
    "greedy_circle": "single server chasing arrivals on a circle",
    "annihilation": "black/white particle annihilation on a circle",
    "polling": "two stations, two exhaustive servers, stochastic paths",
    "polling_scan": "fluid cycle-growth classification over a rate grid",
    "multiaccess": "slotted random-access channel with backoff protocols",
}


class ConfigError(Exception):
    """Carries every validation problem found, not just the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    seed: int
    replications: int
    out: str | None
    params: dict = field(compare=False)


# -- field parsers -----------------------------------------------------
# each returns a value or raises ValueError with the constraint text


def _int_at_least(lo):
    def parse(s):
        v = int(s)
        if v < lo:
            raise ValueError(f"must be an integer >= {lo}")
        return v

    return parse


def _float_range(lo=None, hi=None, lo_open=False, hi_open=False):
    def parse(s):
        v = float(s)
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise ValueError(
                f"must be {'>' if lo_open else '>='} {lo}"
            )
        if hi is not None and (v >= hi if hi_open else v > hi):
            raise ValueError(
                f"must be {'<' if hi_open else '<='} {hi}"
            )
        return v

    return parse


def _dist(s):
    return parse_distribution(s)


def _choice(*options):
    def parse(s):
        v = s.strip()
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v

    return parse


def _float_list(item=_float_range(), sep=","):
    def parse(s):
        parts = [p.strip() for p in s.split(sep)]
        if not parts or parts == [""]:
            raise ValueError("must be a non-empty comma-separated list")
        return tuple(item(p) for p in parts)

    return parse


def _vector_list(dim, item):
    """Semicolon-separated vectors of comma-separated entries."""

    def parse(s):
        groups = [g.strip() for g in s.split(";") if g.strip()]
        if not groups:
            raise ValueError("must list at least one vector")
        out = []
        for g in groups:
            parts = [p.strip() for p in g.split(",")]
            if len(parts) != dim:
                raise ValueError(f"each vector needs exactly {dim} entries")
            out.append(tuple(item(p) for p in parts))
        return tuple(out)

    return parse


_RULE_RE = re.compile(r"^\s*(mult|add|table)\s*\(\s*(.*?)\s*\)\s*$")


def _rule_spec(s):
    """Protocol update rule: mult(a,b), add(da,db), or table(path)."""
    m = _RULE_RE.match(s)
    if not m:
        raise ValueError("must look like mult(a,b), add(da,db), or table(path)")
    kind, body = m.group(1), m.group(2)
    if kind == "table":
        if not body:
            raise ValueError("table(...) needs a file path")
        return ("table", body)
    parts = [p.strip() for p in body.split(",")]
    if len(parts) != 2:
        raise ValueError(f"{kind}(...) needs exactly two numbers")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise ValueError(f"{kind}(...) needs numeric arguments") from None
    if kind == "mult" and (a <= 0 or b <= 0):
        raise ValueError("mult factors must be positive")
    return (kind, a, b)


def load_table_rows(path):
    """Read a table rule file: rows 'threshold p_on_0 p_on_1'."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p for p in re.split(r"[,\s]+", line) if p]
            if len(parts) != 3:
                raise ValueError(
                    f"{path}: table rows need 3 numbers, got {line!r}"
                )
            rows.append(tuple(float(p) for p in parts))
    if not rows:
        raise ValueError(f"{path}: table file has no rows")
    return tuple(rows)


@dataclass(frozen=True)
class Field:
    parse: object
    required: bool = False
    default: object = None
    help: str = ""


_COMMON = {
    "model": Field(_choice(*MODEL_NAMES), required=True,
                   help="which experiment to run"),
    "seed": Field(_int_at_least(0), default=0, help="root RNG seed"),
    "replications": Field(_int_at_least(1), default=1,
                          help="independent replications"),
    "out": Field(str, default=None, help="output CSV path"),
}

_SCHEMAS = {
    "gg1": {
        "service": Field(_dist, required=True),
        "interarrival": Field(_dist, required=True),
        "customers": Field(_int_at_least(1), default=100_000),
        "x0": Field(_float_range(lo=0.0), default=0.0),
        "levels": Field(_float_list(_float_range(lo=0.0)),
                        default=(0.0, 1.0, 2.0)),
    },
    "ggm": {
        "m": Field(_int_at_least(1), required=True),
        "service": Field(_dist, required=True),
        "interarrival": Field(_dist, required=True),
        "customers": Field(_int_at_least(1), default=100_000),
        "levels": Field(_float_list(_float_range(lo=0.0)),
                        default=(0.0, 1.0, 2.0)),
    },
    "jsq": {
        "service": Field(_dist, required=True),
        "interarrival": Field(_dist, required=True),
        "customers": Field(_int_at_least(1), default=5_000),
        "probe_reps": Field(_int_at_least(2), default=200),
        "initials": Field(_vector_list(2, _float_range(lo=0.0)),
                          default=((0.0, 0.0), (50.0, 50.0))),
    },
    "partial3": {
        "lam": Field(_float_range(lo=0.0, lo_open=True), required=True),
        "f_left": Field(_dist, required=True),
        "f_right": Field(_dist, required=True),
        "arrivals": Field(_int_at_least(10), default=20_000),
        "initials": Field(_vector_list(3, _float_range(lo=0.0)),
                          default=((0.0, 0.0, 0.0),)),
    },
    "greedy_circle": {
        "lam": Field(_float_range(lo=0.0, lo_open=True), required=True),
        "L": Field(_float_range(lo=0.0, lo_open=True), default=1.0),
        "v": Field(_float_range(lo=0.0, lo_open=True), default=1.0),
        "policy": Field(_choice("greedy", "always_left", "random_direction"),
                        default="greedy"),
        "lattice_sites": Field(_int_at_least(1), default=None),
        "horizon": Field(_float_range(lo=0.0, lo_open=True), default=2000.0),
    },
    "annihilation": {
        "lam": Field(_float_range(lo=0.0, lo_open=True), required=True),
        "epsilon": Field(_float_range(lo=0.0, lo_open=True), required=True),
        "L": Field(_float_range(lo=0.0, lo_open=True), default=1.0),
        "horizon": Field(_float_range(lo=0.0, lo_open=True), default=2000.0),
    },
    "polling": {
        "mu": Field(_float_list(_float_range(lo=0.0, lo_open=True)),
                    required=True,
                    help="four rates: station0 servers 0,1 then station1"),
        "horizon": Field(_float_range(lo=0.0, lo_open=True), default=1000.0),
        "q0": Field(_float_list(_int_at_least(0)), default=(0, 0)),
    },
    "polling_scan": {
        "resolution": Field(_int_at_least(2), required=True),
        "cycles": Field(_int_at_least(100), default=150),
        "cap_factor": Field(_float_range(lo=0.0, lo_open=True),
                            default=200.0),
    },
    "multiaccess": {
        "feedback": Field(_choice("success", "empty", "collision"),
                          required=True),
        "rule": Field(_rule_spec, required=True),
        "p0": Field(_float_range(lo=0.0, hi=1.0, lo_open=True), default=1.0),
        "p_min": Field(_float_range(lo=0.0, hi=1.0, lo_open=True),
                       default=1e-9),
        "lambdas": Field(
            _float_list(_float_range(lo=0.0, hi=1.0, lo_open=True,
                                     hi_open=True)),
            required=True),
        "slots": Field(_int_at_least(1), default=50_000),
        "w0": Field(_int_at_least(0), default=0),
    },
}

_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_SECTION_RE = re.compile(r"^\[\s*([^\]\s]+)\s*\]$")


def parse_config(text: str, overrides=None) -> ExperimentConfig:
    """Parse and validate; raises ConfigError listing every problem.

    overrides maps common keys (seed, replications, out) to values that
    replace whatever the text says, after parsing.
    """
    errors = []
    entries = {}  # (section, key) -> (raw value, line number)
    section = None
    seen_sections = set()
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1)
            if section in seen_sections:
                errors.append(f"line {ln}: duplicate section [{section}]")
            seen_sections.add(section)
            continue
        if "=" not in line:
            errors.append(f"line {ln}: expected key = value, got {line!r}")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not _KEY_RE.match(key):
            errors.append(f"line {ln}: bad key name {key!r}")
            continue
        if (section, key) in entries:
            errors.append(
                f"line {ln}: duplicate key {key!r}"
                + (f" in section [{section}]" if section else "")
            )
            continue
        entries[(section, key)] = (value, ln)

    # common block
    common = {}
    for key, spec in _COMMON.items():
        if (None, key) in entries:
            value, ln = entries.pop((None, key))
            try:
                common[key] = spec.parse(value)
            except ValueError as e:
                errors.append(f"line {ln}: {key} {e}")
        elif spec.required:
            errors.append(f"config: missing required key {key!r}")
        else:
            common[key] = spec.default
    for (sec, key), (value, ln) in list(entries.items()):
        if sec is None:
            errors.append(f"line {ln}: unknown top-level key {key!r}")
            entries.pop((sec, key))

    model = common.get("model")
    params = {}
    if model:
        schema = _SCHEMAS[model]
        for key, spec in schema.items():
            if (model, key) in entries:
                value, ln = entries.pop((model, key))
                try:
                    params[key] = spec.parse(value)
                except ValueError as e:
                    errors.append(f"line {ln}: {key} {e}")
            elif spec.required:
                errors.append(
                    f"config: missing required key {key!r} for model {model}"
                )
            else:
                params[key] = spec.default
    for (sec, key), (value, ln) in sorted(entries.items(), key=lambda kv: kv[1][1]):
        if sec == model:
            errors.append(
                f"line {ln}: unknown key {key!r} for model {model}"
            )
        else:
            errors.append(
                f"line {ln}: key {key!r} in unexpected section [{sec}]"
            )

    if model and not errors:
        errors.extend(_cross_validate(model, params))

    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            spec = _COMMON.get(key)
            if spec is None:
                errors.append(f"override: unknown key {key!r}")
                continue
            try:
                common[key] = spec.parse(str(value))
            except ValueError as e:
                errors.append(f"override: {key} {e}")

    if common.get("model") == "polling_scan" and common.get("replications", 1) != 1:
        errors.append(
            "config: polling_scan runs a single grid pass; replications must be 1"
        )

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        model=model,
        seed=common["seed"],
        replications=common["replications"],
        out=common["out"],
        params=params,
    )


def _cross_validate(model, params):
    """Constraints spanning several fields; runs only on clean parses."""
    errors = []
    if model == "polling":
        if len(params["mu"]) != 4:
            errors.append("config: polling mu needs exactly 4 rates")
        if len(params["q0"]) != 2:
            errors.append("config: polling q0 needs exactly 2 counts")
    if model == "jsq" and len(params["initials"]) < 2:
        errors.append("config: jsq needs at least 2 initial states to compare")
    return errors


def default_config_text(model: str) -> str:
    """A runnable example config for the model, fully commented."""
    if model not in MODEL_NAMES:
        raise ValueError(f"unknown model {model!r}")
    lines = [
        f"# {model}: {MODEL_SUMMARIES[model]}",
        f"model = {model}",
        "seed = 1",
        "replications = 1" if model == "polling_scan" else "replications = 2",
        "",
        f"[{model}]",
    ]
    examples = {
        "gg1": ["service = exp(1.0)", "interarrival = exp(0.5)",
                "customers = 100000", "levels = 0,1,2"],
        "ggm": ["m = 2", "service = pareto(2.5,1.0)",
                "interarrival = exp(0.3)", "customers = 200000",
                "levels = 0,1,2"],
        "jsq": ["service = exp(1.0)", "interarrival = exp(1.0)",
                "customers = 5000", "probe_reps = 200",
                "initials = 0,0; 50,50"],
        "partial3": ["lam = 1.0", "f_left = exp(1.0)", "f_right = exp(1.0)",
                     "arrivals = 20000", "initials = 0,0,0"],
        "greedy_circle": ["lam = 0.5", "policy = greedy", "horizon = 2000"],
        "annihilation": ["lam = 0.5", "epsilon = 0.5", "horizon = 2000"],
        "polling": ["mu = 0.8,0.8,0.8,0.8", "horizon = 1000", "q0 = 50,50"],
        "polling_scan": ["resolution = 2", "cycles = 150"],
        "multiaccess": ["feedback = collision", "rule = mult(1.1,0.9)",
                        "lambdas = 0.30,0.45", "slots = 50000"],
    }
    lines.extend(examples[model])
    return "\n".join(lines) + "\n"
