"""Problem files: a small TOML dialect for instances and model specs.

See the README for the grammar. Every error is a :class:`ProblemFormatError`
whose message starts with ``file:line:``.
"""

from __future__ import annotations

import re
import sys
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .matrix import (IntMatrix, MatrixFormatError, Shape, assemble_four_block,
                     assemble_transposed_form, read_matrix)
from .models import NetworkSpec, Scenario, SIPSpec
from .problem import INF, NEG_INF, ConvexPiecewise, IPInstance, SeparableObjective

_SECTIONS = {
    "shape": {"kind", "N"},
    "blocks": {"A", "B", "C", "D", "matrix"},
    "rhs": {"b"},
    "bounds": {"lower", "upper"},
    "objective": {"linear", "convex", "scale"},
    "transform": {"original_columns"},
    "network": {"nodes", "edges", "supplies", "edge_cost", "penalty_upper", "scenario"},
    "sip": {"T", "W", "g", "c", "q", "a", "abar", "z", "x_lower", "x_upper", "y_lower", "y_upper"},
}
_CONVEX_KEYS = {"index", "breakpoints", "slopes"}
_SCENARIO_KEYS = {"capacity", "penalty", "probability"}


class ProblemFormatError(ValueError):
    pass


class _Doc:
    def __init__(self, text: str, source: str):
        self.lines = text.splitlines()
        self.source = source

    def line_of(self, key: str, section: str | None = None) -> int:
        """Best-effort line number of ``key`` (inside ``section`` if given)."""
        pat = re.compile(rf"^\s*\"?{re.escape(key)}\"?\s*=")
        head = re.compile(rf"^\s*\[+\s*{re.escape(section)}(\.[\w.]+)?\s*\]+") if section else None
        inside = section is None
        for i, line in enumerate(self.lines, 1):
            stripped = line.strip()
            if stripped.startswith("["):
                inside = section is None or bool(head and head.match(line))
                if section is None and re.match(rf"^\s*\[+\s*{re.escape(key)}\s*\]+", line):
                    return i
                continue
            if inside and pat.match(line):
                return i
        return 1

    def error(self, msg: str, key: str | None = None, section: str | None = None) -> ProblemFormatError:
        line = self.line_of(key, section) if key else 1
        return ProblemFormatError(f"{self.source}:{line}: {msg}")


def _bound_value(x, doc: _Doc, key: str):
    if isinstance(x, bool):
        raise doc.error(f"bound must be an integer or \"inf\"/\"-inf\", got {x!r}", key, "bounds")
    if isinstance(x, int):
        return x
    if x == "inf":
        return INF
    if x == "-inf":
        return NEG_INF
    raise doc.error(f"bound must be an integer or \"inf\"/\"-inf\", got {x!r}", key, "bounds")


def _int_list(x, doc: _Doc, key: str, section: str) -> list[int]:
    if not isinstance(x, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in x):
        raise doc.error(f"{key} must be a list of integers", key, section)
    return list(x)


def _int_rows(x, doc: _Doc, key: str, section: str) -> list[list[int]]:
    if not isinstance(x, list) or not all(isinstance(r, list) for r in x):
        raise doc.error(f"{key} must be a list of integer rows", key, section)
    return [_int_list(r, doc, key, section) for r in x]


def _fraction(x, doc: _Doc, key: str, section: str) -> Fraction:
    try:
        if isinstance(x, bool) or not isinstance(x, (int, str)):
            raise ValueError
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise doc.error(f"{key}: expected an integer or a fraction string like \"1/3\", got {x!r}",
                        key, section) from None


def _matrix(value, doc: _Doc, key: str, base: Path, cols: int | None = None) -> IntMatrix:
    if isinstance(value, str):
        path = Path(value)
        if not path.is_absolute():
            path = base / path
        try:
            return read_matrix(path)
        except OSError as exc:
            raise doc.error(f"cannot read matrix file {value}: {exc.strerror}", key, "blocks") from None
        except MatrixFormatError as exc:
            raise ProblemFormatError(str(exc)) from None
    rows = _int_rows(value, doc, key, "blocks")
    if not rows and cols is None:
        raise doc.error(f"empty inline matrix {key} needs a file with a 'rows cols' header", key, "blocks")
    try:
        return IntMatrix.from_rows(rows, cols)
    except ValueError as exc:
        raise doc.error(f"{key}: {exc}", key, "blocks") from None


def _check_keys(data: dict, doc: _Doc) -> None:
    for section, body in data.items():
        if section not in _SECTIONS:
            raise doc.error(f"unknown section [{section}]", section)
        if not isinstance(body, dict):
            raise doc.error(f"[{section}] must be a table", section)
        for key, value in body.items():
            if key not in _SECTIONS[section]:
                raise doc.error(f"unknown key {key!r} in [{section}]", key, section)
        if section == "objective":
            for term in body.get("convex", []):
                for key in term:
                    if key not in _CONVEX_KEYS:
                        raise doc.error(f"unknown key {key!r} in [[objective.convex]]", key, "objective")
        if section == "network":
            for sc in body.get("scenario", []):
                for key in sc:
                    if key not in _SCENARIO_KEYS:
                        raise doc.error(f"unknown key {key!r} in [[network.scenario]]", key, "network")


def _load(text: str, source: str) -> tuple[dict, _Doc]:
    doc = _Doc(text, source)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None) or 1
        msg = getattr(exc, "msg", str(exc))
        raise ProblemFormatError(f"{source}:{line}: {msg}") from None
    _check_keys(data, doc)
    return data, doc


def _require(body: dict, key: str, doc: _Doc, section: str):
    if key not in body:
        raise doc.error(f"[{section}] is missing {key!r}", section)
    return body[key]


def _instance(data: dict, doc: _Doc, base: Path) -> IPInstance:
    for sec in ("blocks", "rhs", "bounds", "objective"):
        if sec not in data:
            raise doc.error(f"missing section [{sec}]")
    shape = data.get("shape", {"kind": "plain"})
    kind = shape.get("kind", "plain")
    blocks = data["blocks"]
    system = None
    try:
        if kind == "plain":
            if set(blocks) != {"matrix"}:
                raise doc.error("a plain problem needs exactly blocks.matrix", "blocks")
            matrix = _matrix(blocks["matrix"], doc, "matrix", base)
        elif kind in (Shape.FOUR_BLOCK.value, Shape.TRANSPOSED.value):
            N = _require(shape, "N", doc, "shape")
            if not isinstance(N, int) or isinstance(N, bool) or N < 1:
                raise doc.error("N must be a positive integer", "N", "shape")
            mats = {}
            for name in "ABCD":
                mats[name] = _matrix(_require(blocks, name, doc, "blocks"), doc, name, base)
            build = assemble_four_block if kind == Shape.FOUR_BLOCK.value else assemble_transposed_form
            system = build(mats["A"], mats["B"], mats["C"], mats["D"], N)
            matrix = system.matrix
        else:
            raise doc.error(f"shape kind must be plain, fourblock or transposed, got {kind!r}", "kind", "shape")
    except ValueError as exc:
        if isinstance(exc, ProblemFormatError):
            raise
        raise doc.error(str(exc), "blocks") from None

    b = _int_list(_require(data["rhs"], "b", doc, "rhs"), doc, "b", "rhs")
    bounds = data["bounds"]
    lower = [_bound_value(x, doc, "lower") for x in _require(bounds, "lower", doc, "bounds")]
    upper = [_bound_value(x, doc, "upper") for x in _require(bounds, "upper", doc, "bounds")]
    obj = data["objective"]
    linear = _int_list(_require(obj, "linear", doc, "objective"), doc, "linear", "objective")
    terms = {}
    for term in obj.get("convex", []):
        idx = term.get("index")
        if not isinstance(idx, int) or not 0 <= idx < len(linear):
            raise doc.error(f"convex term index {idx!r} out of range", "index", "objective")
        if idx in terms:
            raise doc.error(f"two convex terms for coordinate {idx}", "index", "objective")
        try:
            terms[idx] = ConvexPiecewise(
                tuple(_int_list(term.get("breakpoints", []), doc, "breakpoints", "objective")),
                tuple(_int_list(term.get("slopes", [0]), doc, "slopes", "objective")))
        except ValueError as exc:
            if isinstance(exc, ProblemFormatError):
                raise
            raise doc.error(f"convex term {idx}: {exc}", "index", "objective") from None
    scale = obj.get("scale", 1)
    if not isinstance(scale, int) or scale < 1:
        raise doc.error("objective scale must be a positive integer", "scale", "objective")
    meta = {}
    if "transform" in data:
        meta["original_columns"] = tuple(_int_list(data["transform"].get("original_columns", []), doc,
                                                   "original_columns", "transform"))
    try:
        objective = SeparableObjective.with_terms(linear, terms)
        return IPInstance(matrix, b, lower, upper, objective, system=system,
                          objective_scale=scale, meta=meta)
    except ValueError as exc:
        raise doc.error(str(exc), "b", "rhs") from None


def _network(body: dict, doc: _Doc) -> NetworkSpec:
    sec = "network"
    scen = []
    for sc in _require(body, "scenario", doc, sec):
        scen.append(Scenario(tuple(_int_list(sc.get("capacity"), doc, "capacity", sec)),
                             tuple(_int_list(sc.get("penalty"), doc, "penalty", sec)),
                             _fraction(sc.get("probability"), doc, "probability", sec)))
    edges = _int_rows(_require(body, "edges", doc, sec), doc, "edges", sec)
    if any(len(e) != 2 for e in edges):
        raise doc.error("every edge is a [tail, head] pair", "edges", sec)
    pu = body.get("penalty_upper")
    try:
        return NetworkSpec(
            nodes=_require(body, "nodes", doc, sec),
            edges=tuple((t, h) for t, h in edges),
            supplies=tuple(tuple(s) for s in _int_rows(_require(body, "supplies", doc, sec), doc, "supplies", sec)),
            edge_cost=tuple(_int_list(_require(body, "edge_cost", doc, sec), doc, "edge_cost", sec)),
            scenarios=tuple(scen),
            penalty_upper=pu,
        )
    except ValueError as exc:
        raise doc.error(str(exc), sec) from None


def _sip(body: dict, doc: _Doc) -> SIPSpec:
    sec = "sip"

    def mat(k):
        rows = _int_rows(_require(body, k, doc, sec), doc, k, sec)
        try:
            return IntMatrix.from_rows(rows)
        except ValueError as exc:
            raise doc.error(f"{k}: {exc}", k, sec) from None

    def ints(k):
        return tuple(_int_list(_require(body, k, doc, sec), doc, k, sec))

    try:
        return SIPSpec(
            T=mat("T"), W=mat("W"), g=ints("g"), c=ints("c"), q=ints("q"), a=ints("a"),
            abar=tuple(_fraction(x, doc, "abar", sec) for x in _require(body, "abar", doc, sec)),
            z=tuple(tuple(r) for r in _int_rows(_require(body, "z", doc, sec), doc, "z", sec)),
            x_bounds=(ints("x_lower"), ints("x_upper")),
            y_bounds=(ints("y_lower"), ints("y_upper")),
        )
    except ValueError as exc:
        if isinstance(exc, ProblemFormatError):
            raise
        raise doc.error(str(exc), sec) from None


def parse_problem(text: str, source: str = "<string>", base: Path | None = None):
    """Parse a problem document into an IPInstance, NetworkSpec or SIPSpec."""
    data, doc = _load(text, source)
    base = base or Path(".")
    models = [k for k in ("network", "sip") if k in data]
    if models:
        if len(data) != 1:
            raise doc.error(f"a [{models[0]}] document must not contain other sections", models[0])
        return _network(data["network"], doc) if models[0] == "network" else _sip(data["sip"], doc)
    return _instance(data, doc, base)


def read_problem(path: str | Path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFormatError(f"{path}:1: cannot read file: {exc.strerror}") from None
    return parse_problem(text, str(path), path.parent)


def read_instance(path: str | Path) -> IPInstance:
    obj = read_problem(path)
    if not isinstance(obj, IPInstance):
        raise ProblemFormatError(f"{path}:1: expected an instance, found a model spec (use 'build')")
    return obj


# ---------------------------------------------------------------------------
# writer


def _fmt(x) -> str:
    if x == INF:
        return '"inf"'
    if x == NEG_INF:
        return '"-inf"'
    return str(x)


def _fmt_list(xs) -> str:
    return "[" + ", ".join(_fmt(x) for x in xs) + "]"


def _fmt_rows(M: IntMatrix) -> str:
    if M.rows == 0:
        return "[]"
    return "[" + ", ".join(_fmt_list(r) for r in M.to_rows()) + "]"


def format_problem(instance: IPInstance) -> str:
    """Serialise an instance; parsing the result gives an equal instance.

    Block matrices with zero rows cannot be written inline, so such systems
    are written as a plain matrix.
    """
    out = []
    sys_ = instance.system
    if sys_ is not None and all(getattr(sys_, k).rows > 0 for k in "ABCD"):
        out += ["[shape]", f'kind = "{sys_.shape.value}"', f"N = {sys_.n}", "", "[blocks]"]
        out += [f"{k} = {_fmt_rows(getattr(sys_, k))}" for k in "ABCD"]
    else:
        out += ["[blocks]", f"matrix = {_fmt_rows(instance.matrix)}"]
    out += ["", "[rhs]", f"b = {_fmt_list(instance.b)}", "",
            "[bounds]", f"lower = {_fmt_list(instance.lower)}", f"upper = {_fmt_list(instance.upper)}", "",
            "[objective]", f"linear = {_fmt_list(instance.objective.linear)}"]
    if instance.objective_scale != 1:
        out.append(f"scale = {instance.objective_scale}")
    for i, term in enumerate(instance.objective.convex):
        if term is not None:
            out += ["", "[[objective.convex]]", f"index = {i}",
                    f"breakpoints = {_fmt_list(term.breakpoints)}", f"slopes = {_fmt_list(term.slopes)}"]
    if "original_columns" in instance.meta:
        out += ["", "[transform]", f"original_columns = {_fmt_list(instance.meta['original_columns'])}"]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# bound-validation configs

_CHECKS = {
    "ppi": ({"M", "n"}, set()),
    "stacked": ({"A", "B"}, set()),
    "recursive": ({"A", "B"}, set()),
    "special": ({"A", "a"}, set()),
    "four_block": ({"A", "B", "C", "D", "N"}, {"g"}),
    "random_stacked": ({"count", "rows_a", "rows_b", "cols", "entries"}, set()),
}


def parse_bounds_config(text: str, source: str = "<string>") -> dict:
    """Validate a ``bounds validate`` config.

    Returns ``{"default_suite": bool, "checks": [(kind, params), ...]}`` with
    matrices already converted to :class:`IntMatrix`.
    """
    doc = _Doc(text, source)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFormatError(f"{source}:{getattr(exc, 'lineno', None) or 1}: "
                                 f"{getattr(exc, 'msg', str(exc))}") from None
    checks = []
    default = data.pop("default_suite", None)
    if default is not None and not isinstance(default, bool):
        raise doc.error("default_suite must be true or false", "default_suite")
    for kind, entries in data.items():
        if kind not in _CHECKS:
            raise doc.error(f"unknown key {kind!r}", kind)
        if not isinstance(entries, list):
            raise doc.error(f"{kind} must be an array of tables [[{kind}]]", kind)
        required, optional = _CHECKS[kind]
        for entry in entries:
            keys = set(entry)
            if keys - required - optional:
                bad = sorted(keys - required - optional)[0]
                raise doc.error(f"unknown key {bad!r} in [[{kind}]]", bad, kind)
            if required - keys:
                raise doc.error(f"[[{kind}]] is missing {sorted(required - keys)[0]!r}", kind)
            params = {}
            for key, value in entry.items():
                if key in "ABCD":
                    try:
                        params[key] = IntMatrix.from_rows(_int_rows(value, doc, key, kind))
                    except ValueError as exc:
                        if isinstance(exc, ProblemFormatError):
                            raise
                        raise doc.error(f"{key}: {exc}", key, kind) from None
                elif key == "a":
                    params[key] = tuple(_int_list(value, doc, key, kind))
                elif key == "N" and isinstance(value, list):
                    params[key] = _int_list(value, doc, key, kind)
                elif isinstance(value, int) and not isinstance(value, bool) and value >= 0:
                    params[key] = value
                else:
                    raise doc.error(f"{key} must be a nonnegative integer", key, kind)
            checks.append((kind, params))
    return {"default_suite": not checks if default is None else default, "checks": checks}


def read_bounds_config(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFormatError(f"{path}:1: cannot read file: {exc.strerror}") from None
    return parse_bounds_config(text, str(path))
