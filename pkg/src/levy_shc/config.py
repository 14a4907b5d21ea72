"""Experiment configuration: a small sectioned ``key = value`` dialect.

Example::

    [process]
    kind = stable
    alpha = 1.5
    dimension = 2

    [domain]
    kind = ball
    r = 1

    [experiment]
    t_max = 1e-2
    t_min = 1e-4
    t_count = 3
    n_paths = 100000

    [output]
    csv = scan.csv

Comments start with ``#`` or ``;``.  Keys are case-insensitive.  Unknown
sections and keys are rejected with their line number.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

import numpy as np

from . import catalogue as cat
from .geometry import Domain, DomainError


class ConfigError(ValueError):
    pass


PROCESS_KEYS = {"kind", "base", "alpha", "beta", "m", "gaussian_coefficient", "dimension", "cutoff"}
DOMAIN_KEYS = {"kind", "r", "r1", "r2", "dimension"}
EXPERIMENT_KEYS = {"t_max", "t_min", "t_count", "t_grid", "n_paths", "k", "gamma", "layer_depth",
                   "boundary_fraction", "seed", "tolerance", "integration_depth", "ball_radius", "alphas",
                   "mean_sup_paths", "interior_depth"}
OUTPUT_KEYS = {"csv", "svg", "flush"}
SECTIONS = {"process": PROCESS_KEYS, "domain": DOMAIN_KEYS, "experiment": EXPERIMENT_KEYS, "output": OUTPUT_KEYS}


@dataclass(frozen=True)
class ExperimentConfig:
    spec: cat.LevyProcessSpec
    domain: Domain
    t_grid: tuple
    n_paths: int = 100_000
    k: float = 64.0
    gamma: float = 0.5
    layer_depth: float | None = None
    boundary_fraction: float = 0.8
    seed: int = 0
    tolerance: float = 0.05
    integration_depth: float | None = None
    ball_radius: float = 1.0
    interior_depth: float | None = None
    alphas: tuple = (1.2, 1.5, 1.9)
    mean_sup_paths: int = 50_000
    csv: str | None = None
    svg: str | None = None
    flush: str = "end"
    extras: dict = field(default_factory=dict)


def _line_of(text: str, section: str, key: str | None = None) -> int:
    cur = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            cur = m.group(1).strip().lower()
            if key is None and cur == section:
                return no
            continue
        if key is not None and cur == section:
            m = re.match(r"([^=:#;]+)[=:]", s)
            if m and m.group(1).strip().lower() == key:
                return no
    return 0


def _num(sec, key, text, section, conv=float, default=None):
    if key not in sec:
        return default
    raw = sec[key]
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"line {_line_of(text, section, key)}: {section}.{key} = {raw!r} is not a valid "
                          f"{conv.__name__}") from None


def _floats(raw: str) -> tuple:
    return tuple(float(v) for v in raw.replace(",", " ").split())


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       strict=True, empty_lines_in_values=False)
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: expected a [section] header before {exc.line.strip()!r}") from None
    except configparser.ParsingError as exc:
        no = exc.errors[0][0]
        raise ConfigError(f"line {no}: cannot parse {text.splitlines()[no - 1].strip()!r}") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"line {exc.lineno}: {exc.message if hasattr(exc, 'message') else exc}") from None

    for name in parser.sections():
        if name.lower() not in SECTIONS:
            raise ConfigError(f"line {_line_of(text, name.lower())}: unknown section [{name}]")
        for key in parser[name]:
            if key not in SECTIONS[name.lower()]:
                raise ConfigError(f"line {_line_of(text, name.lower(), key)}: unknown key {key!r} in [{name}]")
    sec = {n.lower(): parser[n] for n in parser.sections()}
    for required in ("process", "domain"):
        if required not in sec:
            raise ConfigError(f"missing [{required}] section")
    empty: dict = {}
    return _build(text, sec["process"], sec["domain"], sec.get("experiment", empty), sec.get("output", empty))


def _build(text, proc, dom, exp, out) -> ExperimentConfig:
    if "kind" not in proc:
        raise ConfigError(f"line {_line_of(text, 'process')}: [process] needs a kind")
    dim = _num(proc, "dimension", text, "process", int, 2)
    kind = proc["kind"].strip()
    params = dict(alpha=_num(proc, "alpha", text, "process", float, 2.0),
                  beta=_num(proc, "beta", text, "process", float, 0.0),
                  m=_num(proc, "m", text, "process", float, 1.0),
                  gaussian_coefficient=_num(proc, "gaussian_coefficient", text, "process", float, 0.0),
                  dimension=dim)
    try:
        if kind == "truncated":
            if "base" not in proc:
                raise ConfigError(f"line {_line_of(text, 'process', 'kind')}: truncated process needs a base kind")
            base = cat.LevyProcessSpec(proc["base"].strip(), **params)
            spec = cat.truncate(base, _num(proc, "cutoff", text, "process", float, 1.0))
        else:
            spec = cat.LevyProcessSpec(kind, **params)
    except cat.InvalidSpecError as exc:
        key = "alpha" if "alpha" in str(exc) else "kind"
        raise ConfigError(f"line {_line_of(text, 'process', key)}: invalid process: {exc}") from None

    dkind = dom.get("kind", "ball").strip()
    ddim = _num(dom, "dimension", text, "domain", int, dim)
    try:
        if dkind == "ball":
            domain = Domain("ball", ddim, (_num(dom, "r", text, "domain", float, 1.0),))
        elif dkind == "annulus":
            if "r1" not in dom or "r2" not in dom:
                raise ConfigError(f"line {_line_of(text, 'domain')}: annulus needs r1 and r2")
            domain = Domain("annulus", ddim, (_num(dom, "r1", text, "domain"), _num(dom, "r2", text, "domain")))
        else:
            raise ConfigError(f"line {_line_of(text, 'domain', 'kind')}: unknown domain kind {dkind!r}")
    except DomainError as exc:
        raise ConfigError(f"line {_line_of(text, 'domain')}: invalid domain: {exc}") from None
    if ddim != dim:
        raise ConfigError(f"line {_line_of(text, 'domain')}: domain dimension {ddim} differs from process "
                          f"dimension {dim}")

    if "t_grid" in exp:
        try:
            t_grid = _floats(exp["t_grid"])
        except ValueError:
            raise ConfigError(f"line {_line_of(text, 'experiment', 't_grid')}: t_grid must be numbers") from None
    else:
        t_max = _num(exp, "t_max", text, "experiment", float, 1e-2)
        t_min = _num(exp, "t_min", text, "experiment", float, 1e-4)
        count = _num(exp, "t_count", text, "experiment", int, 3)
        if not (t_max > t_min > 0) or count < 2:
            raise ConfigError(f"line {_line_of(text, 'experiment')}: t grid needs t_max > t_min > 0 and t_count >= 2")
        t_grid = tuple(float(v) for v in np.logspace(np.log10(t_max), np.log10(t_min), count))
    if len(t_grid) == 0 or any(t <= 0 for t in t_grid) or any(b >= a for a, b in zip(t_grid, t_grid[1:])):
        raise ConfigError(f"line {_line_of(text, 'experiment', 't_grid')}: t grid must be positive and strictly "
                          f"decreasing toward 0")

    n_paths = _num(exp, "n_paths", text, "experiment", int, 100_000)
    if n_paths < 2:
        raise ConfigError(f"line {_line_of(text, 'experiment', 'n_paths')}: n_paths must be >= 2")
    bf = _num(exp, "boundary_fraction", text, "experiment", float, 0.8)
    if not 0 < bf < 1:
        raise ConfigError(f"line {_line_of(text, 'experiment', 'boundary_fraction')}: boundary_fraction must lie "
                          f"in (0, 1)")
    layer = _num(exp, "layer_depth", text, "experiment", float, None)
    if layer is not None and not 0 < layer <= domain.R / 2:
        raise ConfigError(f"line {_line_of(text, 'experiment', 'layer_depth')}: layer depth must lie in (0, R/2] "
                          f"with R = {domain.R}")
    k = _num(exp, "k", text, "experiment", float, 64.0)
    gamma = _num(exp, "gamma", text, "experiment", float, 0.5)
    if not k > 0 or not gamma >= 0:
        raise ConfigError(f"line {_line_of(text, 'experiment')}: step schedule needs K > 0 and gamma >= 0")
    try:
        alphas = _floats(exp["alphas"]) if "alphas" in exp else (1.2, 1.5, 1.9)
    except ValueError:
        raise ConfigError(f"line {_line_of(text, 'experiment', 'alphas')}: alphas must be numbers") from None
    flush = out.get("flush", "end").strip()
    if flush not in ("end", "row"):
        raise ConfigError(f"line {_line_of(text, 'output', 'flush')}: flush must be 'end' or 'row'")
    return ExperimentConfig(
        spec=spec, domain=domain, t_grid=t_grid, n_paths=n_paths, k=k, gamma=gamma, layer_depth=layer,
        boundary_fraction=bf, seed=_num(exp, "seed", text, "experiment", int, 0),
        tolerance=_num(exp, "tolerance", text, "experiment", float, 0.05),
        integration_depth=_num(exp, "integration_depth", text, "experiment", float, None),
        ball_radius=_num(exp, "ball_radius", text, "experiment", float, 1.0),
        interior_depth=_num(exp, "interior_depth", text, "experiment", float, None),
        alphas=alphas, mean_sup_paths=_num(exp, "mean_sup_paths", text, "experiment", int, 50_000),
        csv=out.get("csv"), svg=out.get("svg"), flush=flush)


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
