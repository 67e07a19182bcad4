"""Line-oriented ``key = value`` job configs and reports.

Config grammar::

    # comment
    group = Z3 x Z3
    delta = [[0, 1], [2, 0]]
    mu1 = haar full                 # or: haar trivial | haar gen (1,0) (0,1)
    mu2 = [1/2, 1/2, 0, 0, 0, 0, 0, 0, 0]   # or: point (1,2)
    cmd = check

Product distributions for ``gaussian-check`` add ``mu1.A``, ``mu1.t`` and
optionally ``mu1.shift`` (same for ``mu2``) plus ``eps_real``.  Rationals are
written ``p/q`` in lowest terms, elements ``(c1,...,ck)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigSemanticError, ConfigSyntaxError

COMMANDS = ("check", "feq", "solve-partner", "decompose", "enumerate-auts", "fdm-demo", "gaussian-check")
RANDOMIZED = frozenset({"fdm-demo", "gaussian-check"})
NEEDS_DELTA = frozenset({"check", "feq", "solve-partner", "decompose", "fdm-demo", "gaussian-check"})
#: Commands whose delta must satisfy Ker(I + delta) = {0}.
NEEDS_VALID_DELTA = NEEDS_DELTA - {"fdm-demo"}
NEEDS_MU1 = frozenset({"check", "feq", "decompose", "gaussian-check"})
NEEDS_MU2 = NEEDS_MU1 | {"solve-partner"}

KEY_ORDER = (
    "group", "delta", "eps_real",
    "mu1", "mu1.A", "mu1.t", "mu1.shift",
    "mu2", "mu2.A", "mu2.t", "mu2.shift",
    "cmd", "tol", "seed", "bound", "samples",
)

_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_.\-]*)\s*=\s*(.*?)\s*$")
_TOKEN = re.compile(r"\s*(\[|\]|\(|\)|,|-?\d+(?:/\d+)?)")
_GROUP = re.compile(r"^Z(\d+)$")


def parse_lines(text: str, error=ConfigSyntaxError) -> list[tuple[int, str, str]]:
    """Split into ``(line_number, key, value)``; blank and ``#`` lines are skipped."""
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise error(f"expected 'key = value', got {raw.strip()!r}", n)
        out.append((n, m.group(1), m.group(2)))
    return out


# ---------------------------------------------------------------------------
# literals


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(r"-?\d+(?:/\d+)?", text):
        raise ValueError(f"not a rational: {text!r}")
    value = Fraction(text)
    return value


def render_rational(q: Fraction) -> str:
    return str(Fraction(q))


def _tokens(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected character at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _nested(tokens: list[str], pos: int, open_: str, close: str):
    if tokens[pos] != open_:
        raise ValueError(f"expected {open_!r}")
    pos += 1
    items = []
    if tokens[pos] == close:
        return items, pos + 1
    while True:
        if tokens[pos] == open_:
            item, pos = _nested(tokens, pos, open_, close)
        elif tokens[pos] in "[]()," :
            raise ValueError(f"unexpected {tokens[pos]!r}")
        else:
            item, pos = parse_rational(tokens[pos]), pos + 1
        items.append(item)
        if tokens[pos] == close:
            return items, pos + 1
        if tokens[pos] != ",":
            raise ValueError("expected ','")
        pos += 1


def parse_list(text: str):
    """Nested ``[...]`` list of rationals."""
    toks = _tokens(text)
    try:
        value, pos = _nested(toks, 0, "[", "]")
    except IndexError:
        raise ValueError("unbalanced brackets") from None
    if pos != len(toks):
        raise ValueError("trailing input after list")
    return value


def render_list(value) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(render_list(v) for v in value) + "]"
    return render_rational(value)


def parse_element(text: str) -> tuple[int, ...]:
    toks = _tokens(text)
    try:
        value, pos = _nested(toks, 0, "(", ")")
    except IndexError:
        raise ValueError("unbalanced parentheses") from None
    if pos != len(toks) or any(isinstance(v, list) or v.denominator != 1 for v in value):
        raise ValueError(f"not an element: {text!r}")
    return tuple(int(v) for v in value)


def parse_elements(text: str) -> list[tuple[int, ...]]:
    return [parse_element(m) for m in re.findall(r"\([^()]*\)", text)] if text.strip() else []


def render_element(coords) -> str:
    return "(" + ",".join(str(int(c)) for c in coords) + ")"


def parse_group(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split("x")]
    orders = []
    for p in parts:
        m = _GROUP.match(p)
        if not m:
            raise ValueError(f"bad cyclic factor {p!r}; expected Z<d>")
        orders.append(int(m.group(1)))
    return tuple(orders)


def render_group(orders) -> str:
    return " x ".join(f"Z{d}" for d in orders)


def _int_matrix(value) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise ValueError("expected a matrix [[...], ...]")
    if any(isinstance(v, list) or v.denominator != 1 for r in value for v in r):
        raise ValueError("matrix entries must be integers")
    return tuple(tuple(int(v) for v in r) for r in value)


def _rat_matrix(value) -> tuple[tuple[Fraction, ...], ...]:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise ValueError("expected a matrix [[...], ...]")
    if any(isinstance(v, list) for r in value for v in r):
        raise ValueError("matrix entries must be rationals")
    return tuple(tuple(r) for r in value)


def _rat_vector(value) -> tuple[Fraction, ...]:
    if not isinstance(value, list) or any(isinstance(v, list) for v in value):
        raise ValueError("expected a vector [...]")
    return tuple(value)


# ---------------------------------------------------------------------------
# distribution specs


@dataclass(frozen=True)
class DistSpec:
    """``literal`` masses, ``haar`` of a subgroup, or ``point`` mass."""

    kind: str
    masses: tuple[Fraction, ...] = ()
    subgroup: str = ""  # "full", "trivial" or "gen"
    generators: tuple[tuple[int, ...], ...] = ()
    element: tuple[int, ...] = ()

    def render(self) -> str:
        if self.kind == "literal":
            return render_list(list(self.masses))
        if self.kind == "point":
            return "point " + render_element(self.element)
        if self.subgroup == "gen":
            return "haar gen " + " ".join(render_element(g) for g in self.generators)
        return "haar " + self.subgroup


def parse_dist(text: str) -> DistSpec:
    text = text.strip()
    if text.startswith("["):
        return DistSpec("literal", masses=_rat_vector(parse_list(text)))
    head, _, rest = text.partition(" ")
    rest = rest.strip()
    if head == "point":
        return DistSpec("point", element=parse_element(rest))
    if head == "haar":
        if rest in ("full", "trivial"):
            return DistSpec("haar", subgroup=rest)
        kw, _, gens = rest.partition(" ")
        if kw == "gen":
            return DistSpec("haar", subgroup="gen", generators=tuple(parse_elements(gens)))
    raise ValueError(f"unknown distribution spec {text!r}")


# ---------------------------------------------------------------------------
# job config


@dataclass(frozen=True)
class JobConfig:
    group: tuple[int, ...]
    cmd: str
    delta: tuple[tuple[int, ...], ...] | None = None
    mu1: DistSpec | None = None
    mu2: DistSpec | None = None
    eps_real: tuple[tuple[Fraction, ...], ...] | None = None
    gaussians: tuple = field(default=())  # ((key, value), ...) for mu*.A / mu*.t / mu*.shift
    tol: Fraction | None = None
    seed: int | None = None
    bound: int | None = None
    samples: int | None = None
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def get_gaussian(self, key: str):
        return dict(self.gaussians).get(key)

    def items(self) -> list[tuple[str, str]]:
        out = []
        vals = {
            "group": render_group(self.group),
            "delta": render_list([list(r) for r in self.delta]) if self.delta is not None else None,
            "eps_real": render_list([list(r) for r in self.eps_real]) if self.eps_real is not None else None,
            "mu1": self.mu1.render() if self.mu1 else None,
            "mu2": self.mu2.render() if self.mu2 else None,
            "cmd": self.cmd,
            "tol": render_rational(self.tol) if self.tol is not None else None,
            "seed": str(self.seed) if self.seed is not None else None,
            "bound": str(self.bound) if self.bound is not None else None,
            "samples": str(self.samples) if self.samples is not None else None,
        }
        for k, v in self.gaussians:
            vals[k] = render_element(v) if k.endswith(".shift") else render_list(_listify(v))
        for k in KEY_ORDER:
            if vals.get(k) is not None:
                out.append((k, vals[k]))
        return out


def _listify(v):
    if isinstance(v, tuple):
        return [_listify(x) for x in v]
    return v


def render_config(cfg: JobConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.items())


def parse_config(text: str, validate: bool = True) -> JobConfig:
    """Parse and, unless ``validate`` is false, semantically check a job config.

    Syntax problems raise :class:`ConfigSyntaxError`; problems of meaning
    (a matrix that is not a homomorphism, a delta failing Ker(I+delta)={0},
    a missing seed) raise :class:`ConfigSemanticError`.  Both carry the line.
    """
    entries = parse_lines(text)
    raw: dict[str, tuple[int, str]] = {}
    for n, key, value in entries:
        if key not in KEY_ORDER:
            raise ConfigSyntaxError(f"unknown key {key!r}", n)
        if key in raw:
            raise ConfigSyntaxError(f"duplicate key {key!r}", n)
        raw[key] = (n, value)

    def field_value(key, parser):
        n, value = raw[key]
        try:
            return parser(value)
        except (ValueError, IndexError, ZeroDivisionError) as exc:
            raise ConfigSyntaxError(f"bad value for {key}: {exc}", n) from None

    if "cmd" not in raw:
        raise ConfigSemanticError("missing key 'cmd'")
    if "group" not in raw:
        raise ConfigSemanticError("missing key 'group'")
    cmd = raw["cmd"][1]
    if cmd not in COMMANDS:
        raise ConfigSemanticError(f"unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}", raw["cmd"][0])
    kw = {}
    kw["group"] = field_value("group", parse_group)
    if "delta" in raw:
        kw["delta"] = field_value("delta", lambda s: _int_matrix(parse_list(s)))
    if "eps_real" in raw:
        kw["eps_real"] = field_value("eps_real", lambda s: _rat_matrix(parse_list(s)))
    for key in ("mu1", "mu2"):
        if key in raw:
            kw[key] = field_value(key, parse_dist)
    gauss = []
    for key in ("mu1.A", "mu1.t", "mu1.shift", "mu2.A", "mu2.t", "mu2.shift"):
        if key in raw:
            if key.endswith(".A"):
                parser = lambda s: _rat_matrix(parse_list(s))
            elif key.endswith(".t"):
                parser = lambda s: _rat_vector(parse_list(s))
            else:
                parser = parse_element
            gauss.append((key, field_value(key, parser)))
    kw["gaussians"] = tuple(gauss)
    if "tol" in raw:
        kw["tol"] = field_value("tol", parse_rational)
    for key in ("seed", "bound", "samples"):
        if key in raw:
            kw[key] = field_value(key, lambda s: int(s) if re.fullmatch(r"-?\d+", s) else _bad_int(s))
    cfg = JobConfig(cmd=cmd, lines={k: n for k, (n, _) in raw.items()}, **kw)
    if validate:
        from .jobs import validate_config

        validate_config(cfg)
    return cfg


def _bad_int(s):
    raise ValueError(f"not an integer: {s!r}")


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    """Ordered ``key = value`` entries; ``verdict`` is PASS, FAIL or ERROR."""

    cmd: str
    verdict: str
    entries: list[tuple[str, str]] = field(default_factory=list)
    echo: list[tuple[str, str]] = field(default_factory=list)
    elapsed: float | None = None

    def add(self, key: str, value) -> None:
        self.entries.append((key, _render_value(value)))

    def get(self, key: str, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default

    @property
    def exit_code(self) -> int:
        return {"PASS": 0, "FAIL": 1}.get(self.verdict, 2)

    def render(self, fmt: str = "machine", timing: bool = False) -> str:
        lines = [("cmd", self.cmd)] + [(k, v) for k, v in self.echo if k != "cmd"]
        lines.append(("verdict", self.verdict))
        lines += self.entries
        if timing and self.elapsed is not None:
            lines.append(("elapsed_ms", f"{self.elapsed * 1000:.3f}"))
        if fmt == "machine":
            return "".join(f"{k} = {v}\n" for k, v in lines)
        width = max(len(k) for k, _ in lines)
        body = "".join(f"  {k.ljust(width)} : {v}\n" for k, v in lines)
        if self.elapsed is not None and not timing:
            body += f"  {'elapsed'.ljust(width)} : {self.elapsed:.3f} s\n"
        return f"[{self.verdict}] {self.cmd}\n" + body


def _render_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return render_rational(value)
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def parse_report(text: str) -> Report:
    """Inverse of ``Report.render('machine')``."""
    entries = [(k, v) for _, k, v in parse_lines(text, error=ConfigSyntaxError)]
    if not entries or entries[0][0] != "cmd":
        raise ConfigSyntaxError("report must start with 'cmd = ...'")
    idx = next((i for i, (k, _) in enumerate(entries) if k == "verdict"), None)
    if idx is None:
        raise ConfigSyntaxError("report has no verdict line")
    cmd = entries[0][1]
    rest = entries[idx + 1:]
    elapsed = None
    if rest and rest[-1][0] == "elapsed_ms":
        elapsed = float(rest[-1][1]) / 1000
        rest = rest[:-1]
    return Report(cmd, entries[idx][1], rest, entries[1:idx], elapsed)
