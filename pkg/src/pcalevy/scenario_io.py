"""Scenario files and CSV output.

A scenario file is INI-style text with ``#`` or ``;`` comments::

    [regime0]            normal-regime dynamics (all four keys required)
    mu = 0.2
    sigma = 0.2
    jump_intensity = 1
    jump_rate = 10

    [regime1]            PCA-regime dynamics, same keys

    [model]
    q = 0.1              discount rate
    b = 1                absorption depth
    a_target = 0.3       drawdown right after the infusion
    run_rate = 1         running PCA cost per unit time
    penalty_coeff = 1    insolvency penalty per unit of debt
    bprime = 0.5         optional trigger level, defaults to a_target

    [optimize]           optional sweep/search window
    lo = 0.3             default a_target
    hi = 0.69            default b
    steps = 100          default 100

Unknown sections or keys are rejected by name.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources

from .errors import ParameterError
from .levy_core import RegimeParams
from .pca_cost import Scenario

REGIME_KEYS = ("mu", "sigma", "jump_intensity", "jump_rate")
MODEL_KEYS = ("q", "b", "a_target", "run_rate", "penalty_coeff")
MODEL_OPTIONAL = ("bprime",)
OPTIMIZE_KEYS = ("lo", "hi", "steps")
SECTIONS = {
    "regime0": (REGIME_KEYS, ()),
    "regime1": (REGIME_KEYS, ()),
    "model": (MODEL_KEYS, MODEL_OPTIONAL),
    "optimize": ((), OPTIMIZE_KEYS),
}
BUNDLED = ("paper.scenario",)
SIG_DIGITS = 12


class ScenarioFileError(ParameterError):
    """A scenario file is malformed or describes an invalid scenario."""


@dataclass(frozen=True)
class SweepWindow:
    lo: float
    hi: float
    steps: int


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    window: SweepWindow
    source: str


def resolve_path(path: str) -> str:
    """``path`` itself if it exists, else a bundled scenario of that name."""
    if os.path.exists(path):
        return path
    name = os.path.basename(path)
    if name in BUNDLED:
        return str(resources.files("pcalevy") / "data" / name)
    raise ScenarioFileError(f"scenario file not found: {path}")


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and line.split("=", 1)[0].strip().lower() == key:
            return n
    return None


def _number(text, source, section, key, raw, kind=float):
    try:
        value = kind(raw)
    except ValueError:
        line = _line_of(text, section, key)
        where = f"{source}:{line}" if line else source
        raise ScenarioFileError(f"{where}: [{section}] {key} = {raw!r} is not a valid {kind.__name__}") from None
    if kind is float and not math.isfinite(value):
        raise ScenarioFileError(f"{source}: [{section}] {key} must be finite, got {raw!r}")
    return value


def parse_scenario(text: str, source: str = "<string>") -> ScenarioFile:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"), strict=True)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioFileError(str(exc)) from None

    values = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ScenarioFileError(f"{source}: unknown section [{section}]")
        required, optional = SECTIONS[section]
        for key in cp[section]:
            if key not in required and key not in optional:
                line = _line_of(text, section, key)
                where = f"{source}:{line}" if line else source
                raise ScenarioFileError(f"{where}: unknown key {key!r} in [{section}]")
        missing = [k for k in required if k not in cp[section]]
        if missing:
            raise ScenarioFileError(f"{source}: [{section}] missing key(s) {', '.join(missing)}")
        kinds = {"steps": int}
        values[section] = {
            k: _number(text, source, section, k, v, kinds.get(k, float)) for k, v in cp[section].items()
        }
    for section in ("regime0", "regime1", "model"):
        if section not in values:
            raise ScenarioFileError(f"{source}: missing section [{section}]")

    try:
        model = values["model"]
        scn = Scenario(
            regime0=RegimeParams(**values["regime0"]),
            regime1=RegimeParams(**values["regime1"]),
            q=model["q"],
            b=model["b"],
            a_target=model["a_target"],
            bprime=model.get("bprime", model["a_target"]),
            run_rate=model["run_rate"],
            penalty_coeff=model["penalty_coeff"],
        )
    except ParameterError as exc:
        raise ScenarioFileError(f"{source}: {exc}") from None

    opt = values.get("optimize", {})
    window = SweepWindow(
        lo=opt.get("lo", scn.a_target),
        hi=opt.get("hi", scn.b),
        steps=opt.get("steps", 100),
    )
    return ScenarioFile(scenario=scn, window=window, source=source)


def read_scenario(path: str) -> ScenarioFile:
    resolved = resolve_path(path)
    with open(resolved, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), source=path)


def load_scenario(path: str) -> Scenario:
    return read_scenario(path).scenario


def fmt(value) -> str:
    """CSV cell: 12 significant digits, ``inf`` for divergence (``None``)."""
    if value is None:
        return "inf"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, f".{SIG_DIGITS}g")
    return str(value)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str):
    """Header and rows of a CSV emitted by ``render_csv``, numbers converted back."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for row in reader:
        out = []
        for cell in row:
            try:
                out.append(float(cell))
            except ValueError:
                out.append(cell)
        rows.append(out)
    return header, rows
