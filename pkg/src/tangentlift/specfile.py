"""Reading manifold spec files.

Example::

    [manifold]
    name = "sphere"
    dim = 2
    coords = "theta, phi"

    [metric]
    g[0][0] = "1"
    g[1][1] = "sin(theta)^2"

    [domain]
    theta = 0.3, 2.8
    phi = 0, 6.2
    fiber = -2, 2

    [vectorfield.dphi]
    X[1] = "1"

Missing metric and field entries are zero. A metric entry may be given in
either triangle; giving both with different expressions is an error. ``#``
starts a comment.
"""

from __future__ import annotations

import re
from pathlib import Path

from . import expr as ex
from .geometry import GeometryError, ManifoldSpec, check_domain

_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w]*)(?:\.([A-Za-z_][\w]*))?\s*\]$")
_ASSIGN = re.compile(r"^([A-Za-z_][\w]*)((?:\[\s*\d+\s*\])*)\s*=\s*(.+)$")


class SpecFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = f"{path or '<spec>'}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.line = line


def _string(value: str, lineno: int) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] == '"':
        return value[1:-1]
    raise SpecFileError(f"expected a quoted string, got {value}", lineno)


def _interval(value: str, lineno: int) -> tuple[float, float]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2:
        raise SpecFileError(f"expected 'lo, hi', got {value}", lineno)
    try:
        return float(ex.evaluate(ex.parse(parts[0]), {})), float(ex.evaluate(ex.parse(parts[1]), {}))
    except ex.ExprError as exc:
        raise SpecFileError(f"bad interval bound: {exc}", lineno) from None


def _strip_comment(line: str) -> str:
    out, quoted = [], False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out).strip()


def parse_spec(text: str, path: str | None = None) -> ManifoldSpec:
    sections: dict[tuple[str, str | None], list[tuple[int, str, tuple[int, ...], str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = (m.group(1), m.group(2))
            if current in sections:
                raise SpecFileError(f"duplicate section [{line[1:-1]}]", lineno, path)
            sections[current] = []
            continue
        m = _ASSIGN.match(line)
        if not m:
            raise SpecFileError(f"cannot parse line: {raw.strip()}", lineno, path)
        if current is None:
            raise SpecFileError("assignment outside any section", lineno, path)
        idx = tuple(int(i) for i in re.findall(r"\d+", m.group(2)))
        sections[current].append((lineno, m.group(1), idx, m.group(3)))

    try:
        return _build(sections, path)
    except SpecFileError:
        raise
    except (GeometryError, ex.ExprError) as exc:
        raise SpecFileError(str(exc), None, path) from None


def _build(sections, path) -> ManifoldSpec:
    def err(msg, lineno=None):
        return SpecFileError(msg, lineno, path)

    known = {"manifold", "metric", "domain", "vectorfield", "oneform"}
    for kind, _ in sections:
        if kind not in known:
            raise err(f"unknown section [{kind}]")
    if ("manifold", None) not in sections:
        raise err("missing [manifold] section")
    head = {key: (lineno, val) for lineno, key, _, val in sections[("manifold", None)]}
    for key in ("name", "dim", "coords"):
        if key not in head:
            raise err(f"[manifold] needs '{key}'")
    name = _string(head["name"][1], head["name"][0])
    lineno, dim_text = head["dim"]
    try:
        dim = int(dim_text.strip())
    except ValueError:
        raise err(f"dim must be an integer, got {dim_text.strip()}", lineno) from None
    lineno, coords_text = head["coords"]
    coords = tuple(c.strip() for c in _string(coords_text, lineno).split(",") if c.strip())
    if len(coords) != dim:
        raise err(f"dimension mismatch: dim = {dim} but {len(coords)} coordinates", lineno)
    if len(set(coords)) != dim or any(c in ex.RESERVED or c in ex.FUNCTIONS for c in coords):
        raise err("coordinate names must be distinct and not reserved", lineno)

    def parse_expr(text, lineno):
        try:
            return ex.parse(_string(text, lineno), coords)
        except ex.ExprError as exc:
            raise err(str(exc), lineno) from None

    def index(idx, arity, lineno, label):
        if len(idx) != arity or any(i >= dim for i in idx):
            raise err(f"dimension mismatch: bad index {list(idx)} for {label} in {dim} dimensions", lineno)
        return idx

    metric = [[ex.Num(0.0)] * dim for _ in range(dim)]
    seen: dict[tuple[int, int], tuple[int, str]] = {}
    for lineno, key, idx, val in sections.get(("metric", None), []):
        if key != "g":
            raise err(f"metric entries are written g[j][i], got {key}", lineno)
        j, i = index(idx, 2, lineno, "g")
        text = _string(val, lineno)
        other = seen.get((i, j))
        if other is not None and i != j:
            e_new, e_old = parse_expr(val, lineno), ex.parse(other[1], coords)
            if e_new != e_old:
                raise err(f"g[{j}][{i}] disagrees with g[{i}][{j}] (line {other[0]})", lineno)
        seen[(j, i)] = (lineno, text)
        e = parse_expr(val, lineno)
        metric[j][i] = e
        metric[i][j] = e
    if not seen:
        raise err("empty [metric] section")

    domain: dict[str, tuple[float, float]] = {}
    fiber = None
    for lineno, key, idx, val in sections.get(("domain", None), []):
        if key == "fiber":
            fiber = _interval(val, lineno)
        elif key in coords:
            domain[key] = _interval(val, lineno)
        else:
            raise err(f"unknown coordinate {key!r} in [domain]", lineno)
    missing = [c for c in coords if c not in domain]
    if missing:
        raise err(f"[domain] needs intervals for {missing}")

    def components(kind, key_name):
        table = {}
        for (sec, fname), entries in sections.items():
            if sec != kind:
                continue
            if fname is None:
                raise err(f"[{kind}] needs a name, e.g. [{kind}.X]")
            comps = [ex.Num(0.0)] * dim
            for lineno, key, idx, val in entries:
                if key != key_name:
                    raise err(f"{kind} components are written {key_name}[i], got {key}", lineno)
                (i,) = index(idx, 1, lineno, key_name)
                comps[i] = parse_expr(val, lineno)
            table[fname] = tuple(comps)
        return table

    spec = ManifoldSpec(
        name=name,
        coords=coords,
        metric=tuple(tuple(row) for row in metric),
        vector_fields=components("vectorfield", "X"),
        oneforms=components("oneform", "w"),
        domain=tuple(domain[c] for c in coords),
        fiber=fiber if fiber is not None else (-1.0, 1.0),
    )
    check_domain(spec)
    return spec


def load_spec(path) -> ManifoldSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecFileError(f"cannot read spec file: {exc.strerror}", None, str(path)) from None
    return parse_spec(text, str(path))


CATALOG_DIR = Path(__file__).parent / "catalog"
CATALOG = ("flat_cartesian", "flat_polar", "sphere", "hyperbolic", "revolution")


def catalog_spec(name: str) -> ManifoldSpec:
    return load_spec(CATALOG_DIR / f"{name}.spec")
