"""JSON analysis configurations and the sequence composition tree."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import sequences as sq
from .arveson import DEFAULT_LADDER, Rules
from .asymptotics import DEFAULT_K_MAX, DEFAULT_TAU, DEFAULT_TOL
from .errors import ConfigurationError, SeqSpecError
from .sequences import DimensionFunction, MatrixSequence, Restriction
from .toeplitz import StructuredToeplitzSequence, Symbol, assemble

MIN_HORIZON = 16

ARITY = {"alternate": 2, "direct_sum": 2, "add": 2, "mul": 2}
UNARY = {"scale", "adjoint", "restrict"}
LEAVES = {"toeplitz", "identity", "zero", "explicit"}


def _fail(path: str, msg: str):
    raise ConfigurationError(f"{path}: {msg}")


def _number(v, path) -> complex:
    if isinstance(v, bool):
        _fail(path, "expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        try:
            return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
        except (TypeError, ValueError):
            pass
    _fail(path, "expected a number or {\"re\", \"im\"}")


def _matrix(v, path) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        _fail(path, "expected a nonempty list of rows")
    n = len(v)
    if any(len(r) != n for r in v):
        _fail(path, "matrix must be square")
    m = np.array([[_number(x, f"{path}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(v)])
    if not np.isfinite(m).all():
        _fail(path, "entries must be finite")
    return m.real.copy() if np.all(m.imag == 0) else m


def _int(v, path, lo=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, "expected an integer")
    if lo is not None and v < lo:
        _fail(path, f"must be >= {lo}")
    return v


def _positive(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
        _fail(path, "expected a positive number")
    return float(v)


def _dims(node, path) -> DimensionFunction:
    d = node.get("dims")
    if d is None:
        return sq.IDENTITY_DIMS
    if not isinstance(d, dict):
        _fail(f"{path}.dims", "expected an object")
    if "constant" in d:
        return DimensionFunction.constant(_int(d["constant"], f"{path}.dims.constant", 1))
    return DimensionFunction.linear(_int(d.get("slope", 1), f"{path}.dims.slope", 1),
                                    _int(d.get("offset", 0), f"{path}.dims.offset", 0))


def _eta(node, path, base: Path) -> Restriction:
    if "eta_file" in node:
        try:
            data = json.loads((base / node["eta_file"]).read_text())
        except (OSError, ValueError) as exc:
            _fail(f"{path}.eta_file", str(exc))
        if isinstance(data, dict):
            data = data.get("eta")
        eta = data
    else:
        eta = node.get("eta")
    if isinstance(eta, dict):
        return Restriction.arithmetic(_int(eta.get("start", 1), f"{path}.eta.start", 1),
                                      _int(eta.get("step", 1), f"{path}.eta.step", 1))
    if not isinstance(eta, list) or not eta:
        _fail(f"{path}.eta", "expected a nonempty integer array or {\"start\", \"step\"}")
    return Restriction.from_indices([_int(x, f"{path}.eta[{i}]", 1) for i, x in enumerate(eta)])


def _symbol(node, path, base: Path) -> Symbol:
    if "symbol_file" in node:
        try:
            return Symbol.load(base / node["symbol_file"])
        except OSError as exc:
            _fail(f"{path}.symbol_file", str(exc))
    sym = node.get("symbol")
    if not isinstance(sym, dict):
        _fail(f"{path}.symbol", "expected a symbol object or a symbol_file")
    return Symbol.from_json(sym)


def build_toeplitz(node: dict, path: str = "sequence", base: Path = Path(".")) -> StructuredToeplitzSequence:
    try:
        symbol = _symbol(node, path, base)
    except ConfigurationError as exc:
        if str(exc).startswith(path):
            raise
        _fail(f"{path}.symbol", str(exc))
    k = _matrix(node["K"], f"{path}.K") if node.get("K") is not None else None
    l = _matrix(node["L"], f"{path}.L") if node.get("L") is not None else None
    noise = None
    nz = node.get("noise")
    if nz is not None:
        if not isinstance(nz, dict):
            _fail(f"{path}.noise", "expected an object")
        if "type" in nz:
            noise = build_sequence(nz, f"{path}.noise", base)
        else:
            power = _positive(nz.get("power", 1.0), f"{path}.noise.power")
            scale = float(_number(nz.get("scale", 1.0), f"{path}.noise.scale").real)
            noise = sq.scaled_identity(lambda n: scale / n ** power, label=f"{scale:g}/n^{power:g}")
    return StructuredToeplitzSequence(symbol, k, l, noise,
                                      node.get("k_rank"), node.get("l_rank"))


def build_sequence(node, path: str = "sequence", base: Path = Path(".")) -> MatrixSequence:
    """Turn a composition tree into a MatrixSequence; errors name the offending field."""
    if not isinstance(node, dict):
        _fail(path, "expected an object")
    kind = node.get("type")
    try:
        if kind == "toeplitz":
            return assemble(build_toeplitz(node, path, base))
        if kind == "identity":
            return sq.identity(_dims(node, path))
        if kind == "zero":
            return sq.zero(_dims(node, path))
        if kind == "explicit":
            mats = node.get("matrices")
            if not isinstance(mats, list) or not mats:
                _fail(f"{path}.matrices", "expected a nonempty list of matrices")
            return sq.from_matrices([_matrix(m, f"{path}.matrices[{i}]") for i, m in enumerate(mats)])
        if kind in ARITY:
            args = node.get("args")
            if not isinstance(args, list) or len(args) != ARITY[kind]:
                _fail(f"{path}.args", f"'{kind}' takes exactly {ARITY[kind]} arguments")
            a, b = (build_sequence(x, f"{path}.args[{i}]", base) for i, x in enumerate(args))
            return {"alternate": sq.alternate, "direct_sum": sq.direct_sum, "add": sq.add, "mul": sq.mul}[kind](a, b)
        if kind in UNARY:
            if "arg" not in node:
                _fail(f"{path}.arg", f"'{kind}' needs an 'arg'")
            inner = build_sequence(node["arg"], f"{path}.arg", base)
            if kind == "adjoint":
                return sq.adjoint(inner)
            if kind == "scale":
                return sq.scale(inner, _number(node.get("factor"), f"{path}.factor"))
            return sq.restrict(inner, _eta(node, path, base))
    except ConfigurationError:
        raise
    except SeqSpecError as exc:
        _fail(path, str(exc))
    _fail(f"{path}.type", f"unknown node type {kind!r}")


@dataclass
class Tolerances:
    tol: float = DEFAULT_TOL
    tau: float = DEFAULT_TAU
    eps_ladder: tuple = DEFAULT_LADDER
    rules: Rules = field(default_factory=Rules)
    epsilon: float = 0.01
    stability_tol: float = 1e-4


@dataclass
class AnalysisConfig:
    tree: dict
    sequence: MatrixSequence
    horizon: int
    k_max: int = DEFAULT_K_MAX
    tolerances: Tolerances = field(default_factory=Tolerances)
    grid: Optional[list] = None
    family: list = field(default_factory=list)
    min_length: Optional[int] = None
    base: Path = Path(".")

    def structured(self) -> StructuredToeplitzSequence:
        if self.tree.get("type") != "toeplitz":
            raise ConfigurationError("sequence.type: this command needs a structured 'toeplitz' sequence")
        return build_toeplitz(self.tree, "sequence", self.base)


def _grid(g) -> list:
    if not isinstance(g, dict):
        _fail("grid", "expected {\"min\", \"max\", \"step\"}")
    for key in ("min", "max", "step"):
        v = g.get(key)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            _fail(f"grid.{key}", "expected a finite number")
    lo, hi, step = float(g["min"]), float(g["max"]), _positive(g["step"], "grid.step")
    if hi < lo:
        _fail("grid.max", "must be >= grid.min")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    # round away representation noise so 0.25-type steps give exact points
    return [round(lo + i * step, 12) for i in range(count)]


def _tolerances(t) -> Tolerances:
    if t is None:
        return Tolerances()
    if not isinstance(t, dict):
        _fail("tolerances", "expected an object")
    out = Tolerances()
    for key in ("tol", "tau", "epsilon", "stability_tol"):
        if key in t:
            setattr(out, key, _positive(t[key], f"tolerances.{key}"))
    if "eps_ladder" in t:
        lad = t["eps_ladder"]
        if not isinstance(lad, list) or not lad:
            _fail("tolerances.eps_ladder", "expected a nonempty list")
        vals = [_positive(x, f"tolerances.eps_ladder[{i}]") for i, x in enumerate(lad)]
        if any(a <= b for a, b in zip(vals, vals[1:])):
            _fail("tolerances.eps_ladder", "must be strictly descending")
        out.eps_ladder = tuple(vals)
    if "rules" in t:
        try:
            out.rules = Rules.from_dict(t["rules"])
        except (ConfigurationError, TypeError) as exc:
            _fail("tolerances.rules", str(exc))
    return out


KNOWN_KEYS = {"sequence", "family", "horizon", "k_max", "tolerances", "grid", "min_length", "$schema", "comment"}


def parse_config(data: dict, base: Path = Path("."), horizon: Optional[int] = None) -> AnalysisConfig:
    if not isinstance(data, dict):
        _fail("config", "expected a JSON object")
    unknown = set(data) - KNOWN_KEYS
    if unknown:
        _fail(sorted(unknown)[0], "unknown configuration key")
    if "sequence" not in data:
        _fail("sequence", "missing")
    h = horizon if horizon is not None else data.get("horizon")
    if h is None:
        _fail("horizon", "missing")
    h = _int(h, "horizon", MIN_HORIZON)
    k_max = _int(data.get("k_max", DEFAULT_K_MAX), "k_max", 1)
    seq = build_sequence(data["sequence"], "sequence", base)
    fam_nodes = data.get("family", [])
    if not isinstance(fam_nodes, list):
        _fail("family", "expected a list of sequence nodes")
    family = [build_sequence(f, f"family[{i}]", base) for i, f in enumerate(fam_nodes)]
    grid = _grid(data["grid"]) if "grid" in data else None
    min_length = _int(data["min_length"], "min_length", 1) if "min_length" in data else None
    return AnalysisConfig(data["sequence"], seq, h, k_max, _tolerances(data.get("tolerances")), grid,
                          family, min_length, base)


def load_config(path, horizon: Optional[int] = None) -> AnalysisConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {p}: {exc.strerror}") from None
    except ValueError as exc:
        raise ConfigurationError(f"config: invalid JSON: {exc}") from None
    return parse_config(data, p.parent, horizon)
