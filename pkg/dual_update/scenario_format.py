"""
Parser and formatter for scenario and behavior files.

Both formats are line oriented: ``name:`` starts a section, ``key = value``
lines fill it, ``#`` starts a comment. Complex numbers are written ``re,im``
(or just ``re``) and separated by whitespace.

Scenario file::

    # Bell-type state (|01> + |10>)/sqrt(2)
    state:
      sites = 2 2
      amplitudes = 0 0.7071067811865476 0.7071067811865476 0
    observables:
      Z = 0 0 0 1
    settings:
      A = Z on 1
      B = Z on 2
      a = polarizer 22.5 on 1
    task:
      first = A
      second = B

``density = ...`` may replace ``amplitudes``; matrices are row-major and
their dimension is the square root of the entry count. Sites in files are
numbered from 1 and polarizer angles are in degrees.

Behavior file::

    settings:
      site1 = A1 A2
      site2 = B1 B2
    table A1 B1:
      ++ = 0.25
      +- = 0.25
      -+ = 0.25
      -- = 0.25
    ...
"""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .epr import polarizer_observable
from .errors import DualUpdateError, ScenarioSyntaxError, SiteMismatch
from .jpd import BehaviorTable
from .quantum_state import Observable, QuantumState

logger = logging.getLogger(__name__)

_SECTION = re.compile(r"^([A-Za-z_]\w*)((?:\s+[^\s:]+)*)\s*:\s*$")
_ENTRY = re.compile(r"^([^=\s]+)\s*=\s*(.*?)\s*$")
_TOKEN = re.compile(r"\S+")
_NAME = re.compile(r"^[A-Za-z_]\w*$")

SCENARIO_SECTIONS = ("state", "observables", "settings", "task")
OUTCOME_KEYS = {"++": (0, 0), "+-": (0, 1), "-+": (1, 0), "--": (1, 1)}


@dataclass
class Entry:
    key: str
    value: str
    line: int
    column: int

    def tokens(self) -> List[Tuple[str, int]]:
        """Whitespace-separated value tokens with their 1-based columns."""
        return [(m.group(0), self.column + m.start()) for m in _TOKEN.finditer(self.value)]

    def error(self, message: str, column: Optional[int] = None) -> ScenarioSyntaxError:
        return ScenarioSyntaxError(message, self.line, self.column if column is None else column)


@dataclass
class Section:
    name: str
    args: List[str]
    line: int
    entries: List[Entry] = field(default_factory=list)

    def get(self, key: str) -> Optional[Entry]:
        for e in self.entries:
            if e.key == key:
                return e
        return None


@dataclass(frozen=True)
class Setting:
    """
    A named observable bound to a site.

    Attributes:
        name: Setting name.
        observable: The observable measured.
        site: 0-based site, or ``None`` for the whole space.
        source: Observable name it refers to, or ``None`` for a polarizer.
        angle: Polarizer orientation in degrees, or ``None``.
    """

    name: str
    observable: Observable
    site: Optional[int]
    source: Optional[str] = None
    angle: Optional[float] = None


@dataclass
class Scenario:
    """A parsed scenario file."""

    state: QuantumState
    observables: Dict[str, Observable] = field(default_factory=dict)
    settings: Dict[str, Setting] = field(default_factory=dict)
    task: Dict[str, str] = field(default_factory=dict)

    def setting(self, name: str) -> Setting:
        """
        Look up a setting, falling back to an observable on the whole space.

        Raises:
            KeyError: If neither a setting nor an observable has this name.
            SiteMismatch: If the observable only fits a single site.
        """
        if name in self.settings:
            return self.settings[name]
        if name in self.observables:
            obs = self.observables[name]
            if obs.dim != self.state.dim:
                raise SiteMismatch(
                    f"Observable {name} acts on a single site; bind it to a site under 'settings:'"
                )
            return Setting(name, obs, None, source=name)
        raise KeyError(f"No setting or observable named {name!r}")


class LineParser:
    """Splits text into sections of ``key = value`` entries."""

    def split(self, text: str) -> List[Section]:
        sections: List[Section] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            indent = len(line) - len(line.lstrip())
            stripped = line.strip()
            header = _SECTION.match(stripped)
            if header and "=" not in stripped:
                args = header.group(2).split()
                sections.append(Section(header.group(1), args, lineno))
                continue
            entry = _ENTRY.match(stripped)
            if entry is None:
                raise ScenarioSyntaxError(f"Expected 'key = value' or 'section:', got {stripped!r}",
                                          lineno, indent + 1)
            if not sections:
                raise ScenarioSyntaxError("Entry outside of any section", lineno, indent + 1)
            eq = line.index("=")
            rest = line[eq + 1:]
            value_col = eq + 2 + len(rest) - len(rest.lstrip())
            sections[-1].entries.append(Entry(entry.group(1), entry.group(2), lineno, value_col))
        return sections


def _parse_complex(token: str, line: int, column: int) -> complex:
    parts = token.split(",")
    if len(parts) > 2:
        raise ScenarioSyntaxError(f"Malformed complex number {token!r}", line, column)
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ScenarioSyntaxError(f"Malformed complex number {token!r}", line, column) from None
    if not all(math.isfinite(v) for v in values):
        raise ScenarioSyntaxError(f"Non-finite number {token!r}", line, column)
    return complex(values[0], values[1] if len(values) == 2 else 0.0)


def _complex_list(entry: Entry) -> np.ndarray:
    tokens = entry.tokens()
    if not tokens:
        raise entry.error(f"'{entry.key}' has no values")
    return np.array([_parse_complex(tok, entry.line, col) for tok, col in tokens], dtype=complex)


def _square(entry: Entry) -> np.ndarray:
    values = _complex_list(entry)
    dim = math.isqrt(values.size)
    if dim * dim != values.size:
        raise entry.error(f"'{entry.key}' has {values.size} entries, not a square matrix")
    return values.reshape(dim, dim)


class ScenarioParser:
    """
    Parser for scenario files.
    """

    def parse(self, text: str) -> Scenario:
        """
        Parse scenario text.

        Args:
            text: File contents.

        Returns:
            Scenario: The state, observables, settings and task.

        Raises:
            ScenarioSyntaxError: On malformed text, or values that do not form
                a valid state or observable (with the offending position).
        """
        sections = {}
        for section in LineParser().split(text):
            if section.name not in SCENARIO_SECTIONS:
                raise ScenarioSyntaxError(f"Unknown section {section.name!r}", section.line, 1)
            if section.name in sections:
                raise ScenarioSyntaxError(f"Duplicate section {section.name!r}", section.line, 1)
            sections[section.name] = section
        if "state" not in sections:
            raise ScenarioSyntaxError("Missing 'state:' section", 1, 1)

        state = self._parse_state(sections["state"])
        observables = self._parse_observables(sections.get("observables"))
        settings = self._parse_settings(sections.get("settings"), observables, state)
        task = {e.key: e.value for e in sections["task"].entries} if "task" in sections else {}
        return Scenario(state, observables, settings, task)

    def _parse_state(self, section: Section) -> QuantumState:
        sites = section.get("sites")
        dims = None
        if sites is not None:
            try:
                dims = [int(tok) for tok, _ in sites.tokens()]
            except ValueError:
                raise sites.error("'sites' must list positive integers") from None
        amplitudes = section.get("amplitudes")
        density = section.get("density")
        if (amplitudes is None) == (density is None):
            raise ScenarioSyntaxError("State needs exactly one of 'amplitudes' or 'density'",
                                      section.line, 1)
        entry = amplitudes if amplitudes is not None else density
        try:
            if amplitudes is not None:
                return QuantumState.pure(_complex_list(amplitudes), dims)
            return QuantumState.density(_square(density), dims)
        except ScenarioSyntaxError:
            raise
        except DualUpdateError as e:
            raise entry.error(str(e)) from e

    def _parse_observables(self, section: Optional[Section]) -> Dict[str, Observable]:
        observables: Dict[str, Observable] = {}
        if section is None:
            return observables
        for entry in section.entries:
            if not _NAME.match(entry.key):
                raise ScenarioSyntaxError(f"Invalid observable name {entry.key!r}", entry.line, 1)
            try:
                observables[entry.key] = Observable(_square(entry), label=entry.key)
            except ScenarioSyntaxError:
                raise
            except DualUpdateError as e:
                raise entry.error(str(e)) from e
        return observables

    def _parse_settings(self, section: Optional[Section], observables: Dict[str, Observable],
                        state: QuantumState) -> Dict[str, Setting]:
        settings: Dict[str, Setting] = {}
        if section is None:
            return settings
        for entry in section.entries:
            tokens = entry.tokens()
            if not tokens:
                raise entry.error(f"Setting {entry.key!r} is empty")
            site = None
            if len(tokens) >= 2 and tokens[-2][0] == "on":
                tok, col = tokens[-1]
                if not tok.isdigit() or not 1 <= int(tok) <= state.n_sites:
                    raise ScenarioSyntaxError(f"Invalid site {tok!r}", entry.line, col)
                site = int(tok) - 1
                tokens = tokens[:-2]

            head, col = tokens[0]
            if head == "polarizer":
                if len(tokens) != 2:
                    raise ScenarioSyntaxError("Expected 'polarizer <degrees>'", entry.line, col)
                angle = _parse_complex(tokens[1][0], entry.line, tokens[1][1]).real
                obs = polarizer_observable(math.radians(angle), label=entry.key)
                settings[entry.key] = self._bind(Setting(entry.key, obs, site, angle=angle), state, entry)
                continue
            if len(tokens) != 1:
                raise ScenarioSyntaxError("Expected '<observable> [on <site>]'", entry.line, col)
            if head not in observables:
                raise ScenarioSyntaxError(f"Unknown observable {head!r}", entry.line, col)
            setting = Setting(entry.key, observables[head], site, source=head)
            settings[entry.key] = self._bind(setting, state, entry)
        return settings

    def _bind(self, setting: Setting, state: QuantumState, entry: Entry) -> Setting:
        expected = state.dim if setting.site is None else state.site_dims[setting.site]
        if setting.observable.dim != expected:
            where = "the whole space" if setting.site is None else f"site {setting.site + 1}"
            raise entry.error(
                f"Setting {setting.name} has dimension {setting.observable.dim}, "
                f"{where} has dimension {expected}"
            )
        return setting


def _format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return format(z.real + 0.0, ".17g")
    return f"{z.real + 0.0:.17g},{z.imag + 0.0:.17g}"


class ScenarioFormatter:
    """
    Formatter from Scenario values back to scenario text.

    Numbers use 17 significant digits so parsing the output reproduces the
    values exactly.
    """

    def format(self, scenario: Scenario) -> str:
        state = scenario.state
        lines = ["state:", f"  sites = {' '.join(str(d) for d in state.site_dims)}"]
        key = "amplitudes" if state.is_pure else "density"
        lines.append(f"  {key} = {self._values(np.asarray(state.data).reshape(-1))}")
        if scenario.observables:
            lines.append("observables:")
            for name, obs in scenario.observables.items():
                lines.append(f"  {name} = {self._values(np.asarray(obs.matrix).reshape(-1))}")
        if scenario.settings:
            lines.append("settings:")
            for name, s in scenario.settings.items():
                lines.append(f"  {name} = {self._setting(s)}")
        if scenario.task:
            lines.append("task:")
            for k, v in scenario.task.items():
                lines.append(f"  {k} = {v}")
        return "\n".join(lines) + "\n"

    def _values(self, values: np.ndarray) -> str:
        return " ".join(_format_complex(z) for z in values)

    def _setting(self, s: Setting) -> str:
        head = f"polarizer {s.angle:.17g}" if s.angle is not None else str(s.source)
        return head if s.site is None else f"{head} on {s.site + 1}"


class BehaviorParser:
    """Parser for behavior files."""

    def parse(self, text: str) -> BehaviorTable:
        sections = LineParser().split(text)
        settings_section = next((s for s in sections if s.name == "settings"), None)
        if settings_section is None:
            raise ScenarioSyntaxError("Missing 'settings:' section", 1, 1)
        labels = []
        for key in ("site1", "site2"):
            entry = settings_section.get(key)
            if entry is None or len(entry.tokens()) != 2:
                raise ScenarioSyntaxError(f"'settings' needs '{key} = <name> <name>'",
                                          settings_section.line, 1)
            labels.append(tuple(tok for tok, _ in entry.tokens()))

        tables = np.full((2, 2, 2, 2), np.nan)
        for section in sections:
            if section.name == "settings":
                continue
            if section.name != "table" or len(section.args) != 2:
                raise ScenarioSyntaxError(f"Expected 'table <A> <B>:', got section {section.name!r}",
                                          section.line, 1)
            a, b = section.args
            if a not in labels[0] or b not in labels[1]:
                raise ScenarioSyntaxError(f"Unknown setting pair {a} {b}", section.line, 1)
            i, j = labels[0].index(a), labels[1].index(b)
            for entry in section.entries:
                if entry.key not in OUTCOME_KEYS:
                    raise ScenarioSyntaxError(f"Outcome key must be one of ++ +- -+ --, got {entry.key!r}",
                                              entry.line, 1)
                tokens = entry.tokens()
                if len(tokens) != 1:
                    raise entry.error("Expected a single probability")
                x, y = OUTCOME_KEYS[entry.key]
                tables[i, j, x, y] = _parse_complex(tokens[0][0], entry.line, tokens[0][1]).real
        if np.isnan(tables).any():
            raise ScenarioSyntaxError("Behavior file does not fill all four 2x2 tables", 1, 1)
        try:
            return BehaviorTable(tables, (labels[0], labels[1]))
        except DualUpdateError as e:
            raise ScenarioSyntaxError(str(e), 1, 1) from e


class BehaviorFormatter:
    """Formatter for behavior files."""

    def format(self, behavior: BehaviorTable) -> str:
        (a1, a2), (b1, b2) = behavior.settings
        lines = ["settings:", f"  site1 = {a1} {a2}", f"  site2 = {b1} {b2}"]
        for i, a in enumerate((a1, a2)):
            for j, b in enumerate((b1, b2)):
                lines.append(f"table {a} {b}:")
                for key, (x, y) in OUTCOME_KEYS.items():
                    lines.append(f"  {key} = {behavior.tables[i, j, x, y]:.17g}")
        return "\n".join(lines) + "\n"


# Convenience functions

def parse_scenario(text: str) -> Scenario:
    """Parse scenario text. See ``ScenarioParser.parse``."""
    return ScenarioParser().parse(text)


def format_scenario(scenario: Scenario) -> str:
    return ScenarioFormatter().format(scenario)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Read and parse a scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    logger.debug(f"Loaded scenario {path} ({len(text)} bytes)")
    return parse_scenario(text)


def validate_scenario_syntax(text: str) -> Tuple[bool, str]:
    """
    Validate scenario text.

    Returns:
        Tuple of (is_valid, error_message).
    """
    try:
        parse_scenario(text)
        return (True, "")
    except ScenarioSyntaxError as e:
        return (False, str(e))


def parse_behavior(text: str) -> BehaviorTable:
    return BehaviorParser().parse(text)


def format_behavior(behavior: BehaviorTable) -> str:
    return BehaviorFormatter().format(behavior)


def load_behavior(path: Union[str, Path]) -> BehaviorTable:
    """Read and parse a behavior file."""
    return parse_behavior(Path(path).read_text(encoding="utf-8"))
