"""INI-style run configuration: [problem], [problem.weight], [problem.nonlinearity], [task], [output].

See README.md for the full grammar. Numeric values accept arithmetic with
``pi``, ``e`` and ``inf`` (``200*pi``, ``6/5``).
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from . import families as fam
from .problem import DescriptorSource, NearZeroClass, Nonlinearity, ProblemSpec, SignPartition, Weight
from .radial import RadialProblem, reduce

TASKS = ("check", "solve", "poincare", "eigen", "radial", "lambda-scan")
FORMATS = ("csv", "json", "both")
BUNDLED = ("fig1", "fig2", "radial-n3", "constant-weight")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    path: Path
    task: str
    task_params: dict
    problem: Optional[ProblemSpec] = None
    radial: Optional[RadialProblem] = None
    out_dir: Path = Path("out")
    fmt: str = "both"
    precision: int = 17
    raw: dict = field(default_factory=dict, repr=False)
    task_section: Optional["_Section"] = field(default=None, repr=False)


def bundled_config(name: str) -> Path:
    return Path(str(resources.files("posbvp") / "configs" / f"{name}.ini"))


def resolve_config_path(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    if arg in BUNDLED:
        return bundled_config(arg)
    raise ConfigError(f"config file not found: {arg}")


class _Section:
    """Key access with file/line diagnostics."""

    def __init__(self, cfg: "_Reader", name: str):
        self.cfg = cfg
        self.name = name
        self.data = cfg.parser[name] if cfg.parser.has_section(name) else {}

    def where(self, key: Optional[str] = None) -> str:
        line = self.cfg.line_of(self.name, key)
        loc = f"{self.cfg.path}:{line}" if line else str(self.cfg.path)
        return f"{loc}: [{self.name}]" + (f" {key}" if key else "")

    def has(self, key: str) -> bool:
        return key in self.data

    def str(self, key: str, default=None, required: bool = False) -> Optional[str]:
        if key in self.data:
            return self.data[key].strip()
        if required:
            raise ConfigError(f"{self.where()}: missing required key '{key}'")
        return default

    def num(self, key: str, default=None, required: bool = False) -> Optional[float]:
        text = self.str(key, None, required)
        if text is None:
            return default
        try:
            return fam.parse_number(text)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ConfigError(f"{self.where(key)}: {exc}") from None

    def int(self, key: str, default=None, required: bool = False) -> Optional[int]:
        val = self.num(key, default, required)
        if val is None:
            return None
        if val != int(val):
            raise ConfigError(f"{self.where(key)}: expected an integer, got {val}")
        return int(val)

    def numlist(self, key: str, default=None) -> Optional[list]:
        text = self.str(key)
        if text is None:
            return default
        try:
            return [fam.parse_number(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise ConfigError(f"{self.where(key)}: {exc}") from None

    def pairs(self, key: str) -> Optional[list]:
        """'a:b, c:d' -> [(a, b), (c, d)]."""
        text = self.str(key)
        if text is None:
            return None
        out = []
        for item in text.split(","):
            if not item.strip():
                continue
            parts = item.split(":")
            if len(parts) != 2:
                raise ConfigError(f"{self.where(key)}: expected 'x:y' pairs, got {item.strip()!r}")
            try:
                out.append((fam.parse_number(parts[0]), fam.parse_number(parts[1])))
            except ValueError as exc:
                raise ConfigError(f"{self.where(key)}: {exc}") from None
        return out

    def file(self, key: str) -> Path:
        text = self.str(key, required=True)
        p = Path(text)
        if not p.is_absolute():
            p = self.cfg.path.parent / p
        if not p.exists():
            raise ConfigError(f"{self.where(key)}: file not found: {p}")
        return p


class _Reader:
    def __init__(self, path: Path):
        self.path = path
        self.text = path.read_text()
        self.parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
        self.parser.optionxform = str  # keys are case-sensitive (N, R1, R2)
        try:
            self.parser.read_string(self.text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        self.lines = self.text.splitlines()

    def line_of(self, section: str, key: Optional[str]) -> Optional[int]:
        current = None
        for i, line in enumerate(self.lines, start=1):
            s = line.strip()
            m = re.match(r"^\[(.+)\]$", s)
            if m:
                current = m.group(1).strip()
                if key is None and current == section:
                    return i
                continue
            if current == section and key is not None and re.match(rf"^{re.escape(key)}\s*[=:]", s):
                return i
        return None

    def section(self, name: str) -> _Section:
        return _Section(self, name)


def _weight(sec: _Section, L: float) -> Weight:
    family = sec.str("family", required=True)
    if family == "sin":
        w = fam.sin_weight(L, sec.num("k", required=True), sec.num("amplitude", 1.0))
    elif family == "cos":
        w = fam.cos_weight(L, sec.num("k", required=True), sec.num("amplitude", 1.0))
    elif family == "constant":
        w = fam.constant_weight(L, sec.num("value", 1.0))
    elif family == "linear":
        w = fam.linear_weight(L, sec.num("slope", required=True), sec.num("intercept", 0.0))
    elif family == "power":
        w = fam.power_weight(L, sec.num("coef", 1.0), sec.num("p", required=True))
    elif family == "table":
        path = sec.file("file")
        try:
            xs, ys = fam.read_table(path)
            w = fam.table_weight(L, xs, ys, name=path.name)
        except ValueError as exc:
            raise ConfigError(f"{sec.where('file')}: {exc}") from None
    else:
        raise ConfigError(f"{sec.where('family')}: unknown weight family {family!r}")
    part = sec.pairs("partition")
    if part:
        try:
            w = replace(w, partition=SignPartition(tuple(part)))
        except ValueError as exc:
            raise ConfigError(f"{sec.where('partition')}: {exc}") from None
    scale = sec.num("scale")
    if scale is not None:
        if not scale > 0:
            raise ConfigError(f"{sec.where('scale')}: must be positive")
        w = w.scaled(scale)
    return w


def _param(sec: _Section, family: str, key: str, default=None, required=False):
    scoped = f"{family}.{key}"
    if sec.has(scoped):
        return sec.num(scoped)
    return sec.num(key, default, required)


def _single_g(sec: _Section, family: str) -> Nonlinearity:
    if family == "power":
        return fam.power_g(_param(sec, family, "coef", 1.0), _param(sec, family, "p", required=True))
    if family == "polynomial":
        key = "polynomial.terms" if sec.has("polynomial.terms") else "terms"
        terms = sec.pairs(key)
        if not terms:
            raise ConfigError(f"{sec.where()}: polynomial needs 'terms = coef:power, ...'")
        try:
            return fam.polynomial_g(terms)
        except ValueError as exc:
            raise ConfigError(f"{sec.where(key)}: {exc}") from None
    if family == "arctan":
        return fam.arctan_g(_param(sec, family, "k", 1.0))
    if family == "sin-inverse":
        return fam.sin_inverse_g(
            _param(sec, family, "p", 3.0), _param(sec, family, "q", 2.0), _param(sec, family, "k", 1.0)
        )
    if family == "table":
        path = sec.file("file")
        try:
            ss, gs = fam.read_table(path)
            return fam.table_g(ss, gs, name=path.name)
        except ValueError as exc:
            raise ConfigError(f"{sec.where('file')}: {exc}") from None
    raise ConfigError(f"{sec.where('family')}: unknown nonlinearity family {family!r}")


def _nonlinearity(sec: _Section) -> Nonlinearity:
    family = sec.str("family", required=True)
    m = re.fullmatch(r"min\((.*)\)", family.replace(" ", ""))
    if m:
        parts = [p for p in m.group(1).split(",") if p]
        if len(parts) < 2:
            raise ConfigError(f"{sec.where('family')}: min(...) needs at least two families")
        g = fam.min_g(*(_single_g(sec, p) for p in parts))
    else:
        g = _single_g(sec, family)
    updates = {}
    cls = sec.str("near_zero_class")
    if cls is not None:
        try:
            updates["near_zero_class"] = NearZeroClass(cls)
        except ValueError:
            choices = ", ".join(c.value for c in NearZeroClass)
            raise ConfigError(f"{sec.where('near_zero_class')}: expected one of {choices}") from None
    for key in ("delta", "g0_inf", "g0_sup", "g_infty"):
        val = sec.num(key)
        if val is not None:
            updates[key] = val
    declared = [k for k in ("g0_inf", "g0_sup", "g_infty") if k in updates]
    updates["descriptor_source"] = (
        DescriptorSource.USER_DECLARED if len(declared) == 3 else DescriptorSource.GRID_ESTIMATED
    )
    try:
        return replace(g, **updates)
    except ValueError as exc:
        raise ConfigError(f"{sec.where()}: {exc}") from None


def load_config(path: str | Path, task_override: Optional[str] = None) -> RunConfig:
    path = resolve_config_path(str(path))
    rd = _Reader(path)
    for name in rd.parser.sections():
        if name not in ("problem", "problem.weight", "problem.nonlinearity", "task", "output"):
            raise ConfigError(f"{rd.section(name).where()}: unknown section")
    prob = rd.section("problem")
    task_sec = rd.section("task")
    task = task_override or task_sec.str("name", required=True)
    if task not in TASKS:
        raise ConfigError(f"{task_sec.where('name')}: unknown task {task!r} (choose from {', '.join(TASKS)})")

    g = _nonlinearity(rd.section("problem.nonlinearity"))
    wsec = rd.section("problem.weight")
    label = prob.str("label", path.stem)
    cfg = RunConfig(path, task, dict(task_sec.data), raw={s: dict(rd.parser[s]) for s in rd.parser.sections()})
    cfg.task_params = {k: v for k, v in cfg.task_params.items() if k != "name"}
    cfg.task_section = task_sec

    if prob.has("N") or task == "radial":
        N = prob.int("N", required=True)
        R1 = prob.num("R1", required=True)
        R2 = prob.num("R2", required=True)
        try:
            cfg.radial = RadialProblem(N, R1, R2, _weight(wsec, R2), g, label=label)
        except ValueError as exc:
            raise ConfigError(f"{prob.where()}: {exc}") from None
        cfg.problem = replace(reduce(cfg.radial).spec, label=label)
    else:
        L = prob.num("L", 1.0)
        if not L > 0:
            raise ConfigError(f"{prob.where('L')}: L must be positive")
        cfg.problem = ProblemSpec(_weight(wsec, L), g, label=label)

    out = rd.section("output")
    cfg.out_dir = Path(out.str("dir", f"out/{label}"))
    cfg.fmt = out.str("format", "both")
    if cfg.fmt not in FORMATS:
        raise ConfigError(f"{out.where('format')}: expected csv, json or both")
    cfg.precision = out.int("precision", 17)
    return cfg


def task_value(cfg: RunConfig, key: str, default=None, kind=float):
    sec = cfg.task_section
    if kind is int:
        return sec.int(key, default)
    if kind is list:
        return sec.numlist(key, default)
    if kind is str:
        return sec.str(key, default)
    if kind == "pairs":
        return sec.pairs(key) or default
    return sec.num(key, default)
