"""Seeded instance generation, the worked-example fixture and file formats.

Instance files are plain text::

    format_version: 1
    name: knapsack-0
    num_vars: 3
    num_objectives: 2
    num_constraints: 1

    [objectives]
    4 1 7
    2 9 3

    [constraints]
    5 2 8 <= 7

    [lower]
    0 0 0

    [upper]
    1 1 implied

    [generator]
    p: 2
    ...

Blank lines and ``#`` comments are ignored. The ``[generator]`` section is
optional and records the generator settings behind an instance.
"""
import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import InstanceFormatError
from .model import MOILPProblem

MODULUS = 2**31 - 1
MULTIPLIER = 16807
FORMAT_VERSION = 1


# ------------------------------------------------------------------ random

class LehmerStream:
    """Minimal-standard multiplicative generator ``s <- 16807 s mod (2^31 - 1)``."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 < seed < MODULUS:
            raise ValueError(f"seed must lie in 1..{MODULUS - 1}, got {seed}")
        self.state = seed

    def next_raw(self) -> int:
        self.state = (MULTIPLIER * self.state) % MODULUS
        return self.state

    def draw(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        if hi < lo:
            raise ValueError("empty range")
        v = lo + (self.next_raw() * (hi - lo + 1)) // MODULUS
        return min(v, hi)

    def __iter__(self) -> Iterator[int]:
        while True:
            yield self.next_raw()


def lehmer_stream(seed: int) -> Iterator[int]:
    return iter(LehmerStream(seed))


# --------------------------------------------------------------- generator

@dataclass(frozen=True)
class GeneratorSpec:
    p: int
    n: int
    m: int
    var_kind: str = "binary"
    coeff_range: tuple = (1, 100)
    objective_seeds: tuple = ()
    constraint_seeds: tuple = ()
    seed_increment: int = 5
    instance_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeff_range", tuple(int(v) for v in self.coeff_range))
        object.__setattr__(self, "objective_seeds", tuple(int(s) for s in self.objective_seeds))
        object.__setattr__(self, "constraint_seeds", tuple(int(s) for s in self.constraint_seeds))
        lo, hi = self.coeff_range
        if self.p < 2 or self.n < 1 or self.m < 0:
            raise ValueError("need p >= 2, n >= 1 and m >= 0")
        if lo > hi:
            raise ValueError(f"coefficient range [{lo}, {hi}] is empty")
        if self.var_kind not in ("binary", "integer"):
            raise ValueError("var_kind must be 'binary' or 'integer'")
        if len(self.objective_seeds) != self.p or len(self.constraint_seeds) != self.m:
            raise ValueError("one seed per objective and per constraint is required")
        if any(s <= 0 for s in self.objective_seeds + self.constraint_seeds):
            raise ValueError("seeds must be positive")
        if self.var_kind == "integer" and lo < 1:
            raise ValueError("integer instances need positive constraint coefficients "
                             "to keep the search box bounded")

    def effective_seeds(self):
        shift = self.seed_increment * self.instance_index
        return (tuple(s + shift for s in self.objective_seeds),
                tuple(s + shift for s in self.constraint_seeds))

    def with_index(self, index: int) -> "GeneratorSpec":
        d = asdict(self)
        d["instance_index"] = index
        return GeneratorSpec(**d)


def generate(spec: GeneratorSpec) -> MOILPProblem:
    """Draw one instance.

    Each objective and each constraint owns a stream; coefficients are drawn
    in ascending variable order. Right-hand sides are half the row sum,
    rounded down.
    """
    lo, hi = spec.coeff_range
    obj_seeds, con_seeds = spec.effective_seeds()
    C = []
    for s in obj_seeds:
        st = LehmerStream(s)
        C.append([st.draw(lo, hi) for _ in range(spec.n)])
    A = []
    for s in con_seeds:
        st = LehmerStream(s)
        A.append([st.draw(lo, hi) for _ in range(spec.n)])
    b = [sum(row) // 2 for row in A]
    upper = (1,) * spec.n if spec.var_kind == "binary" else None
    name = f"{spec.var_kind}-p{spec.p}-n{spec.n}-m{spec.m}-{spec.instance_index}"
    return MOILPProblem(np.array(C, dtype=np.int64),
                        np.array(A, dtype=np.int64).reshape(spec.m, spec.n),
                        np.array(b, dtype=np.int64), None, upper, name)


def knapsack_spec(n: int, p: int = 3, m: int = 1, var_kind: str = "binary",
                  objective_seeds: Sequence[int] = (128, 888, 6, 52),
                  constraint_seeds: Sequence[int] = (40, 91, 17, 63, 75),
                  coeff_range=(1, 100), index: int = 0) -> GeneratorSpec:
    return GeneratorSpec(p, n, m, var_kind, tuple(coeff_range), tuple(objective_seeds[:p]),
                         tuple(constraint_seeds[:m]), 5, index)


# ----------------------------------------------------------------- fixture

def illustrative_fixture() -> MOILPProblem:
    """Seven-variable, seven-constraint, three-objective worked example."""
    C = [[2, 0, 0, -2, 0, -2, -2],
         [-2, 1, 2, -1, 1, 2, -1],
         [-1, -2, 0, -2, 3, 1, 0]]
    A = [[1, 1, 3, 0, 3, 2, 0],
         [0, 3, 2, 4, 0, 0, 0],
         [5, 3, 0, 0, 5, 4, 4],
         [4, 2, 0, 4, 0, 4, 0],
         [5, 2, 0, 3, 1, 4, 0],
         [2, 2, 0, 4, 4, 4, 5],
         [3, 0, 2, 0, 5, 1, 2]]
    b = [61, 72, 76, 51, 66, 59, 77]
    return MOILPProblem(np.array(C), np.array(A), np.array(b), name="illustrative")


# -------------------------------------------------------------- file format

@dataclass
class InstanceFile:
    problem: MOILPProblem
    spec: Optional[GeneratorSpec] = None
    version: int = FORMAT_VERSION


def dumps_instance(problem: MOILPProblem, spec: Optional[GeneratorSpec] = None) -> str:
    out = [f"format_version: {FORMAT_VERSION}",
           f"name: {problem.name}",
           f"num_vars: {problem.num_vars}",
           f"num_objectives: {problem.num_objectives}",
           f"num_constraints: {problem.num_constraints}",
           "", "[objectives]"]
    out += [" ".join(str(int(v)) for v in row) for row in problem.objectives]
    out += ["", "[constraints]"]
    out += [" ".join(str(int(v)) for v in row) + f" <= {int(bi)}"
            for row, bi in zip(problem.constraints, problem.rhs)]
    out += ["", "[lower]", " ".join(str(int(v)) for v in problem.lower)]
    out += ["", "[upper]", " ".join("implied" if u is None else str(u) for u in problem.upper)]
    if spec is not None:
        out += ["", "[generator]"]
        for key, val in asdict(spec).items():
            if isinstance(val, (tuple, list)):
                val = " ".join(str(v) for v in val)
            out.append(f"{key}: {val}")
    return "\n".join(out) + "\n"


def save_instance(problem: MOILPProblem, path, spec: Optional[GeneratorSpec] = None) -> Path:
    path = Path(path)
    path.write_text(dumps_instance(problem, spec))
    return path


_HEADER_KEYS = ("format_version", "name", "num_vars", "num_objectives", "num_constraints")
_SECTIONS = ("objectives", "constraints", "lower", "upper")


def _ints(tokens, lineno, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise InstanceFormatError(f"expected integers in {what}", line=lineno, field=what) from None


def loads_instance(text: str) -> InstanceFile:
    header = {}
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS + ("generator",):
                raise InstanceFormatError(f"unknown section [{current}]", line=lineno)
            if current in sections:
                raise InstanceFormatError(f"duplicate section [{current}]", line=lineno)
            sections[current] = []
            continue
        if current is None:
            if ":" not in line:
                raise InstanceFormatError("expected 'key: value'", line=lineno)
            key, val = (s.strip() for s in line.split(":", 1))
            if key not in _HEADER_KEYS:
                raise InstanceFormatError(f"unknown header key {key!r}", line=lineno, field=key)
            header[key] = (val, lineno)
        else:
            sections[current].append((lineno, line))

    for key in _HEADER_KEYS:
        if key != "name" and key not in header:
            raise InstanceFormatError(f"missing header field {key!r}", field=key)
    version_s, vline = header["format_version"]
    if version_s != str(FORMAT_VERSION):
        raise InstanceFormatError(f"unsupported format version {version_s!r}",
                                  line=vline, field="format_version")
    dims = {}
    for key in ("num_vars", "num_objectives", "num_constraints"):
        val, ln = header[key]
        dims[key] = _ints([val], ln, key)[0]
    n, p, m = dims["num_vars"], dims["num_objectives"], dims["num_constraints"]
    for sec in _SECTIONS:
        if sec not in sections:
            raise InstanceFormatError(f"missing section [{sec}]", field=sec)

    def rows_of(sec, count):
        rows = sections[sec]
        if len(rows) != count:
            last = rows[-1][0] if rows else None
            raise InstanceFormatError(f"section [{sec}] has {len(rows)} rows, expected {count}",
                                      line=last, field=sec)
        return rows

    C = []
    for ln, line in rows_of("objectives", p):
        row = _ints(line.split(), ln, "objectives")
        if len(row) != n:
            raise InstanceFormatError(f"objective row has {len(row)} entries, expected {n}",
                                      line=ln, field="objectives")
        C.append(row)
    A, b = [], []
    for ln, line in rows_of("constraints", m):
        if "<=" not in line:
            raise InstanceFormatError("constraint rows must end with '<= rhs'",
                                      line=ln, field="constraints")
        lhs, rhs = line.split("<=", 1)
        row = _ints(lhs.split(), ln, "constraints")
        if len(row) != n:
            raise InstanceFormatError(f"constraint row has {len(row)} entries, expected {n}",
                                      line=ln, field="constraints")
        A.append(row)
        b.append(_ints(rhs.split(), ln, "constraints")[0])
    (ln_lo, lo_line), = rows_of("lower", 1)
    lower = _ints(lo_line.split(), ln_lo, "lower")
    (ln_up, up_line), = rows_of("upper", 1)
    upper = [None if t == "implied" else _ints([t], ln_up, "upper")[0] for t in up_line.split()]
    if len(lower) != n or len(upper) != n:
        raise InstanceFormatError("bound rows need one entry per variable",
                                  line=ln_lo if len(lower) != n else ln_up, field="bounds")

    spec = None
    if "generator" in sections:
        spec = _parse_spec(sections["generator"])
    name = header.get("name", ("", 0))[0]
    try:
        problem = MOILPProblem(np.array(C, dtype=np.int64),
                               np.array(A, dtype=np.int64).reshape(m, n),
                               np.array(b, dtype=np.int64), np.array(lower, dtype=np.int64),
                               tuple(upper), name)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc
    return InstanceFile(problem, spec, FORMAT_VERSION)


def _parse_spec(rows) -> GeneratorSpec:
    vals = {}
    for ln, line in rows:
        if ":" not in line:
            raise InstanceFormatError("expected 'key: value'", line=ln, field="generator")
        key, val = (s.strip() for s in line.split(":", 1))
        vals[key] = (val, ln)
    try:
        return GeneratorSpec(
            p=int(vals["p"][0]), n=int(vals["n"][0]), m=int(vals["m"][0]),
            var_kind=vals["var_kind"][0],
            coeff_range=tuple(int(v) for v in vals["coeff_range"][0].split()),
            objective_seeds=tuple(int(v) for v in vals["objective_seeds"][0].split()),
            constraint_seeds=tuple(int(v) for v in vals["constraint_seeds"][0].split()),
            seed_increment=int(vals["seed_increment"][0]),
            instance_index=int(vals["instance_index"][0]),
        )
    except KeyError as exc:
        raise InstanceFormatError(f"generator section lacks {exc.args[0]!r}",
                                  field=exc.args[0]) from None
    except ValueError as exc:
        raise InstanceFormatError(f"bad generator section: {exc}", field="generator") from None


def load_instance(path) -> InstanceFile:
    return loads_instance(Path(path).read_text())


# ---------------------------------------------------------------- points

@dataclass
class PointRow:
    z: tuple
    strategy: str = ""
    iteration: int = 0
    extra: dict = field(default_factory=dict)


def write_points(path, points: Sequence[Sequence[int]], strategy: str = "",
                 iterations: Optional[Sequence[int]] = None, json_mirror: bool = True) -> Path:
    """Write ``z_1..z_p, strategy, iteration`` rows, plus a ``.json`` twin."""
    path = Path(path)
    pts = [tuple(int(v) for v in z) for z in points]
    p = len(pts[0]) if pts else 0
    its = list(iterations) if iterations is not None else list(range(len(pts)))
    cols = [f"z_{i + 1}" for i in range(p)] + ["strategy", "iteration"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for z, it in zip(pts, its):
            w.writerow(list(z) + [strategy, it])
    if json_mirror:
        rows = [dict(zip(cols, list(z) + [strategy, it])) for z, it in zip(pts, its)]
        path.with_suffix(".json").write_text(json.dumps({"columns": cols, "rows": rows}, indent=1))
    return path


def read_points(path) -> list:
    """Outcome vectors from a CSV or JSON file written by :func:`write_points`."""
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        cols = [c for c in data["columns"] if c.startswith("z_")]
        return [tuple(int(r[c]) for c in cols) for r in data["rows"]]
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        cols = [c for c in (reader.fieldnames or []) if c.startswith("z_")]
        if not cols:
            raise InstanceFormatError("no z_ columns found", field="header")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(tuple(int(row[c]) for c in cols))
            except (TypeError, ValueError):
                raise InstanceFormatError("non-integer coordinate", line=lineno) from None
        return out


def write_table(path, rows: Sequence[dict], json_mirror: bool = True) -> Path:
    """Generic CSV writer with the same JSON mirror convention."""
    path = Path(path)
    cols = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)
    if json_mirror:
        path.with_suffix(".json").write_text(json.dumps({"columns": cols, "rows": list(rows)},
                                                        indent=1, default=str))
    return path
