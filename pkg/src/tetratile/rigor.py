"""Outward-rounded interval arithmetic and a certified branch-and-bound engine.

Every primitive operation rounds its endpoints outward (via ``math.nextafter``)
so that the exact real result of an operation on exactly-contained inputs is
always contained in the output interval.  ``certify_positive`` uses this
containment guarantee to prove that a nonnegative objective is strictly
positive over a box, or to localize the region where it might vanish.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Interval",
    "Box",
    "Expr",
    "Const",
    "Var",
    "PI",
    "TWO_PI",
    "HALF_PI",
    "pi_multiple",
    "ieval",
    "certify_positive",
    "solid_angle_interval",
    "PositivityCertificate",
    "Undecided",
    "DivisorStraddlesZero",
    "NegativeSqrt",
    "OmegaStraddlesZero",
    "BudgetExhausted",
]

_INF = math.inf

# libm's sin/cos are not correctly rounded; two ulps of outward slack covers
# the worst observed error on all mainstream platforms.
_TRIG_ULPS = 2


class DivisorStraddlesZero(ZeroDivisionError):
    pass


class NegativeSqrt(ValueError):
    pass


class OmegaStraddlesZero(ZeroDivisionError):
    pass


class BudgetExhausted(RuntimeError):
    def __init__(self, message, boxes_remaining):
        super().__init__(message)
        self.boxes_remaining = boxes_remaining


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _trig_down(x: float) -> float:
    for _ in range(_TRIG_ULPS):
        x = math.nextafter(x, -_INF)
    return max(x, -1.0)


def _trig_up(x: float) -> float:
    for _ in range(_TRIG_ULPS):
        x = math.nextafter(x, _INF)
    return min(x, 1.0)


class Interval:
    """Closed interval [lo, hi] with outward-rounded endpoint arithmetic."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float):
        lo = float(lo)
        hi = float(hi)
        if not lo <= hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        m = 0.5 * (self.lo + self.hi)
        if not self.lo <= m <= self.hi:  # overflow guard
            m = self.lo
        return m

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other):
        o = _as_interval(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = _as_interval(other)
        return Interval(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        o = _as_interval(other)
        ll = self.lo * o.lo
        lh = self.lo * o.hi
        hl = self.hi * o.lo
        hh = self.hi * o.hi
        return Interval(_down(min(ll, lh, hl, hh)), _up(max(ll, lh, hl, hh)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_interval(other)
        if o.lo <= 0.0 <= o.hi:
            raise DivisorStraddlesZero(f"divisor {o!r} contains zero")
        ll = self.lo / o.lo
        lh = self.lo / o.hi
        hl = self.hi / o.lo
        hh = self.hi / o.hi
        return Interval(_down(min(ll, lh, hl, hh)), _up(max(ll, lh, hl, hh)))

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def sq(self) -> "Interval":
        ll, hh = abs(self.lo), abs(self.hi)
        big = max(ll, hh)
        small = 0.0 if self.lo <= 0.0 <= self.hi else min(ll, hh)
        return Interval(max(_down(small * small), 0.0), _up(big * big))

    def sqrt(self) -> "Interval":
        if self.hi < 0.0:
            raise NegativeSqrt(f"sqrt of {self!r}")
        lo = max(self.lo, 0.0)
        return Interval(max(_down(math.sqrt(lo)), 0.0), _up(math.sqrt(self.hi)))

    def cos(self) -> "Interval":
        return _cos_interval(self)

    def sin(self) -> "Interval":
        return _sin_interval(self)


def _as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(float(x), float(x))


# math.pi underestimates pi by less than one ulp.
PI = Interval(math.pi, _up(math.pi))
TWO_PI = PI + PI
HALF_PI = PI * Interval.point(0.5)


def pi_multiple(num: int, den: int) -> Interval:
    """Tight interval for (num/den)*pi."""
    return PI * Interval.point(float(num)) / Interval.point(float(den))


def _extremum_inside(x: Interval, offset_halves: int) -> dict:
    """Which cos/sin extrema k*pi + offset (offset in half-pi units) may lie in x.

    Returns {'+1': bool, '-1': bool} conservatively (may report an extremum
    that is not actually inside; never misses one that is).
    """
    # Candidate integers k with k*pi + offset intersecting [x.lo, x.hi].
    lo_shift = x.lo - offset_halves * HALF_PI.hi
    hi_shift = x.hi - offset_halves * HALF_PI.lo
    k_min = math.floor(lo_shift / math.pi) - 1
    k_max = math.ceil(hi_shift / math.pi) + 1
    out = {"max": False, "min": False}
    for k in range(k_min, k_max + 1):
        point = PI * Interval.point(float(k)) + HALF_PI * Interval.point(float(offset_halves))
        if point.intersects(x):
            if k % 2 == 0:
                out["max"] = True
            else:
                out["min"] = True
    return out


def _cos_interval(x: Interval) -> Interval:
    if x.width >= TWO_PI.hi:
        return Interval(-1.0, 1.0)
    # cos has maxima at even multiples of pi, minima at odd multiples
    ext = _extremum_inside(x, 0)
    vals = [_trig_down(math.cos(x.lo)), _trig_up(math.cos(x.lo)),
            _trig_down(math.cos(x.hi)), _trig_up(math.cos(x.hi))]
    lo, hi = min(vals), max(vals)
    if ext["max"]:
        hi = 1.0
    if ext["min"]:
        lo = -1.0
    return Interval(lo, hi)


def _sin_interval(x: Interval) -> Interval:
    if x.width >= TWO_PI.hi:
        return Interval(-1.0, 1.0)
    # sin has maxima at pi/2 + even multiples of pi, minima at pi/2 + odd ones
    ext = _extremum_inside(x, 1)
    vals = [_trig_down(math.sin(x.lo)), _trig_up(math.sin(x.lo)),
            _trig_down(math.sin(x.hi)), _trig_up(math.sin(x.hi))]
    lo, hi = min(vals), max(vals)
    if ext["max"]:
        hi = 1.0
    if ext["min"]:
        lo = -1.0
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Expression trees
# ---------------------------------------------------------------------------

class Expr:
    """Node of an expression DAG over {+, -, *, /, sin, cos, sqrt, sq}.

    Shared subtrees (same Python object) are evaluated once per point/box,
    so building expressions with reused node objects acts as common
    subexpression elimination.
    """

    __slots__ = ()

    def __add__(self, other):
        return _Op("add", self, _as_expr(other))

    def __radd__(self, other):
        return _Op("add", _as_expr(other), self)

    def __sub__(self, other):
        return _Op("sub", self, _as_expr(other))

    def __rsub__(self, other):
        return _Op("sub", _as_expr(other), self)

    def __mul__(self, other):
        return _Op("mul", self, _as_expr(other))

    def __rmul__(self, other):
        return _Op("mul", _as_expr(other), self)

    def __truediv__(self, other):
        return _Op("div", self, _as_expr(other))

    def __rtruediv__(self, other):
        return _Op("div", _as_expr(other), self)

    def __neg__(self):
        return _Op("neg", self)

    def sin(self):
        return _Op("sin", self)

    def cos(self):
        return _Op("cos", self)

    def sqrt(self):
        return _Op("sqrt", self)

    def sq(self):
        return _Op("sq", self)

    def variables(self) -> set:
        out = set()
        stack = [self]
        seen = set()
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if isinstance(node, Var):
                out.add(node.name)
            elif isinstance(node, _Op):
                stack.extend(node.args)
        return out


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        # value may be a float or an Interval (for exact constants like pi/4)
        self.value = value

    def __repr__(self):
        return f"Const({self.value!r})"


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return f"Var({self.name!r})"


class _Op(Expr):
    __slots__ = ("op", "args")

    def __init__(self, op: str, *args: Expr):
        self.op = op
        self.args = args

    def __repr__(self):
        return f"_Op({self.op!r}, {', '.join(map(repr, self.args))})"


def _as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(float(x))


class Program:
    """Expression DAG compiled to a flat instruction list for fast evaluation."""

    def __init__(self, roots: Sequence[Expr]):
        self.instrs = []  # (op, arg registers...)
        self.consts = []
        self.var_slots = {}  # name -> register
        self.root_regs = []
        memo = {}

        def compile_node(node: Expr) -> int:
            key = id(node)
            if key in memo:
                return memo[key]
            if isinstance(node, Const):
                reg = len(self.instrs)
                self.instrs.append(("const", len(self.consts)))
                self.consts.append(node.value)
            elif isinstance(node, Var):
                if node.name in self.var_slots:
                    memo[key] = self.var_slots[node.name]
                    return self.var_slots[node.name]
                reg = len(self.instrs)
                self.instrs.append(("var", node.name))
                self.var_slots[node.name] = reg
            else:
                arg_regs = [compile_node(a) for a in node.args]
                reg = len(self.instrs)
                self.instrs.append((node.op, *arg_regs))
            memo[key] = reg
            return reg

        for r in roots:
            self.root_regs.append(compile_node(r))

    def eval_interval(self, box: Mapping[str, Interval]) -> list:
        regs = [None] * len(self.instrs)
        consts = self.consts
        for i, instr in enumerate(self.instrs):
            op = instr[0]
            if op == "const":
                v = consts[instr[1]]
                regs[i] = v if isinstance(v, Interval) else Interval.point(v)
            elif op == "var":
                regs[i] = box[instr[1]]
            elif op == "add":
                regs[i] = regs[instr[1]] + regs[instr[2]]
            elif op == "sub":
                regs[i] = regs[instr[1]] - regs[instr[2]]
            elif op == "mul":
                regs[i] = regs[instr[1]] * regs[instr[2]]
            elif op == "div":
                regs[i] = regs[instr[1]] / regs[instr[2]]
            elif op == "neg":
                regs[i] = -regs[instr[1]]
            elif op == "sin":
                regs[i] = regs[instr[1]].sin()
            elif op == "cos":
                regs[i] = regs[instr[1]].cos()
            elif op == "sqrt":
                regs[i] = regs[instr[1]].sqrt()
            elif op == "sq":
                regs[i] = regs[instr[1]].sq()
            else:
                raise ValueError(f"unknown op {op}")
        return [regs[r] for r in self.root_regs]

    def eval_float(self, point: Mapping[str, float]) -> list:
        regs = [0.0] * len(self.instrs)
        consts = self.consts
        for i, instr in enumerate(self.instrs):
            op = instr[0]
            if op == "const":
                v = consts[instr[1]]
                regs[i] = v.mid if isinstance(v, Interval) else v
            elif op == "var":
                regs[i] = point[instr[1]]
            elif op == "add":
                regs[i] = regs[instr[1]] + regs[instr[2]]
            elif op == "sub":
                regs[i] = regs[instr[1]] - regs[instr[2]]
            elif op == "mul":
                regs[i] = regs[instr[1]] * regs[instr[2]]
            elif op == "div":
                regs[i] = regs[instr[1]] / regs[instr[2]]
            elif op == "neg":
                regs[i] = -regs[instr[1]]
            elif op == "sin":
                regs[i] = math.sin(regs[instr[1]])
            elif op == "cos":
                regs[i] = math.cos(regs[instr[1]])
            elif op == "sqrt":
                regs[i] = math.sqrt(regs[instr[1]])
            elif op == "sq":
                regs[i] = regs[instr[1]] * regs[instr[1]]
            else:
                raise ValueError(f"unknown op {op}")
        return [regs[r] for r in self.root_regs]


# ---------------------------------------------------------------------------
# Boxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """Named variables -> Interval, with optional provenance notes."""

    vars: tuple  # tuple of (name, Interval) pairs, name-sorted
    provenance: tuple = ()

    @classmethod
    def from_dict(cls, d: Mapping[str, Interval], provenance: Iterable = ()) -> "Box":
        return cls(tuple(sorted(d.items())), tuple(provenance))

    def as_dict(self) -> dict:
        return dict(self.vars)

    @property
    def names(self):
        return [n for n, _ in self.vars]

    def interval(self, name: str) -> Interval:
        for n, iv in self.vars:
            if n == name:
                return iv
        raise KeyError(name)

    @property
    def max_width(self) -> float:
        return max((iv.width for _, iv in self.vars), default=0.0)

    def widest_var(self) -> str:
        return max(self.vars, key=lambda kv: kv[1].width)[0]

    def split(self) -> tuple:
        """Bisect the widest variable at its midpoint."""
        name = self.widest_var()
        d = self.as_dict()
        iv = d[name]
        m = iv.mid
        lo_half = dict(d)
        hi_half = dict(d)
        lo_half[name] = Interval(iv.lo, m)
        hi_half[name] = Interval(m, iv.hi)
        return (Box.from_dict(lo_half, self.provenance),
                Box.from_dict(hi_half, self.provenance))

    def center(self) -> dict:
        return {n: iv.mid for n, iv in self.vars}

    def to_json(self) -> dict:
        return {n: [iv.lo, iv.hi] for n, iv in self.vars}


def ieval(expr: Expr, box: Box) -> Interval:
    """Interval image of an expression over a box (containment-guaranteed)."""
    return Program([expr]).eval_interval(box.as_dict())[0]


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------

@dataclass
class PositivityCertificate:
    """Finite box cover proving the objective cannot vanish on the start box.

    Every leaf either carries a strictly positive interval lower bound or
    violates one of the caller's necessary side constraints (recorded with
    the violation reason).
    """

    case_id: str
    cover: list  # list of (Box, lower_bound)
    boxes_examined: int
    wall_time_s: float
    infeasible_leaves: list = field(default_factory=list)  # list of (Box, reason)

    @property
    def min_bound(self) -> float:
        return min(b for _, b in self.cover) if self.cover else _INF

    def to_json(self) -> dict:
        return {
            "kind": "positivity_certificate",
            "case_id": self.case_id,
            "boxes_examined": self.boxes_examined,
            "min_lower_bound": self.min_bound if self.cover else None,
            "cover": [{"box": box.to_json(), "lower_bound": lb} for box, lb in self.cover],
            "infeasible_leaves": [{"box": box.to_json(), "reason": reason}
                                  for box, reason in self.infeasible_leaves],
        }


@dataclass
class Undecided:
    """Boxes at the width floor that could not be excluded."""

    case_id: str
    surviving_boxes: list
    cover: list  # positive-bound leaves found along the way
    boxes_examined: int
    wall_time_s: float

    def to_json(self) -> dict:
        return {
            "kind": "undecided",
            "case_id": self.case_id,
            "boxes_examined": self.boxes_examined,
            "surviving_boxes": [b.to_json() for b in self.surviving_boxes],
        }


def certify_positive(objective: Expr, box: Box, width_floor: float = 1e-4,
                     budget: int = 10**6, case_id: str = "",
                     program: Program | None = None, infeasible=None):
    """Prove objective > 0 over box, or localize where it might vanish.

    The objective must be pointwise nonnegative (a sum of squares).  Boxes are
    processed worst-lower-bound first; each is either discharged (interval
    lower bound > 0, or `infeasible(box)` returns a violation reason for a
    necessary side constraint), declared surviving (width <= width_floor), or
    bisected along its widest variable.  Deterministic for fixed inputs.
    """
    prog = program if program is not None else Program([objective])
    t0 = time.perf_counter()
    counter = 0
    heap = []

    def push(b: Box):
        nonlocal counter
        val = prog.eval_interval(b.as_dict())[0]
        counter += 1
        heapq.heappush(heap, (val.lo, counter, b, val))

    push(box)
    cover = []
    infeasible_leaves = []
    surviving = []
    examined = 0
    while heap:
        lb, _, b, val = heapq.heappop(heap)
        examined += 1
        if examined > budget:
            remaining = [b] + [item[2] for item in heap]
            raise BudgetExhausted(
                f"budget {budget} exhausted with {len(remaining)} boxes open", remaining)
        if val.lo > 0.0:
            cover.append((b, val.lo))
            continue
        if infeasible is not None:
            reason = infeasible(b)
            if reason is not None:
                infeasible_leaves.append((b, reason))
                continue
        if b.max_width <= width_floor:
            surviving.append(b)
            continue
        for half in b.split():
            push(half)
    wall = time.perf_counter() - t0
    if not surviving:
        return PositivityCertificate(case_id, cover, examined, wall, infeasible_leaves)
    return Undecided(case_id, surviving, cover, examined, wall)


def solid_angle_interval(a: Interval, b: Interval, c: Interval) -> Interval:
    """Interval image of the solid angle a + b + c - pi at a vertex."""
    return a + b + c - PI


def steradian_count_interval(omega: Interval) -> Interval:
    """Interval for 4*pi / omega; raises if omega may be zero."""
    if omega.lo <= 0.0 <= omega.hi:
        raise OmegaStraddlesZero(f"solid angle interval {omega!r} contains zero")
    return (TWO_PI + TWO_PI) / omega
