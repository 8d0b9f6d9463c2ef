"""Interval arithmetic and branch-and-bound tests.

The central property is containment: any exact evaluation at a point inside a
box lies inside the interval evaluation over that box.  The fuzzer builds
random expression DAGs and random boxes and checks exactly that.
"""

import json
import math
import random

import pytest

from tetratile import rigor
from tetratile.rigor import (
    Box,
    BudgetExhausted,
    Const,
    DivisorStraddlesZero,
    Interval,
    NegativeSqrt,
    OmegaStraddlesZero,
    PI,
    Program,
    Undecided,
    Var,
    certify_positive,
    ieval,
    pi_multiple,
    solid_angle_interval,
    steradian_count_interval,
)


# --- primitive operations -----------------------------------------------------

def test_interval_basic_ops():
    x = Interval(2, 3)
    assert x.sq().lo <= 4 <= 9 <= x.sq().hi
    assert x.sq().lo == pytest.approx(4, rel=1e-15)
    y = x + Interval(1, 1)
    assert y.lo <= 3 <= 4 <= y.hi
    z = x * Interval(-1, 2)
    assert z.lo <= -3 and z.hi >= 6
    w = Interval(1, 2) / Interval(2, 4)
    assert w.lo <= 0.25 <= 1.0 <= w.hi


def test_interval_invalid():
    with pytest.raises(ValueError):
        Interval(2, 1)


def test_division_straddle_raises():
    with pytest.raises(DivisorStraddlesZero):
        Interval(1, 2) / Interval(-1, 1)


def test_sqrt():
    s = Interval(4, 9).sqrt()
    assert s.lo <= 2 <= 3 <= s.hi
    clamped = Interval(-1, 4).sqrt()
    assert clamped.lo == 0.0 and clamped.hi >= 2
    with pytest.raises(NegativeSqrt):
        Interval(-3, -1).sqrt()


def test_sin_interior_extremum():
    s = Interval(0, math.pi).sin()
    assert s.hi == 1.0
    assert s.lo <= 0.0
    assert s.lo > -1e-300


def test_cos_monotone_piece():
    c = Interval(0.1, 0.2).cos()
    assert c.lo <= math.cos(0.2) <= math.cos(0.1) <= c.hi
    assert c.hi - c.lo < (math.cos(0.1) - math.cos(0.2)) + 1e-12


def test_cos_contains_minimum():
    c = Interval(3.0, 3.3).cos()  # pi inside
    assert c.lo == -1.0


def test_trig_clipped():
    for iv in (Interval(0, 7), Interval(-100, 100), Interval(1.5707, 1.5708)):
        for f in (Interval.sin, Interval.cos):
            out = f(iv)
            assert -1.0 <= out.lo <= out.hi <= 1.0


def test_pi_multiple_tight():
    x = pi_multiple(2, 3)
    assert x.width < 5e-15
    assert x.lo <= 2 * math.pi / 3 <= x.hi


# --- expressions ---------------------------------------------------------------

def test_ieval_square_example():
    x = Var("x")
    out = ieval(x.sq(), Box.from_dict({"x": Interval(2, 3)}))
    assert out.lo == pytest.approx(4, rel=1e-14)
    assert out.hi == pytest.approx(9, rel=1e-14)


def test_ieval_sine_monotonicity_aware():
    x = Var("x")
    out = ieval(x.sin(), Box.from_dict({"x": Interval(0, math.pi)}))
    assert out.hi == 1.0


def test_ieval_dependency_containment():
    # x^2 - 2x over [0,2]: naive bound is [-4,4]; containment of the exact
    # range [-1,0] must hold regardless
    x = Var("x")
    expr = x.sq() - Const(2.0) * x
    out = ieval(expr, Box.from_dict({"x": Interval(0, 2)}))
    exact = [t * t - 2 * t for t in [i / 1000 * 2 for i in range(1001)]]
    assert out.lo <= min(exact) and max(exact) <= out.hi
    assert out.lo <= -1.0001 or out.lo <= -1.0  # naive width is allowed


def test_program_shared_subexpressions():
    x = Var("x")
    s = x.sin()
    expr = s * s + s
    prog = Program([expr])
    ops = [i[0] for i in prog.instrs]
    assert ops.count("sin") == 1  # shared node evaluated once


# --- containment fuzzing --------------------------------------------------------

def _random_expr(rng, vars_, depth):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Const(rng.uniform(-2, 2)), lambda p: None
        name = rng.choice(vars_)
        return Var(name), None
    op = rng.choice(["add", "sub", "mul", "div", "sin", "cos", "sqrt", "sq", "neg"])
    a, _ = _random_expr(rng, vars_, depth - 1)
    if op in ("sin", "cos", "sqrt", "sq", "neg"):
        return getattr(a, op)() if op != "neg" else -a, None
    b, _ = _random_expr(rng, vars_, depth - 1)
    return {"add": a + b, "sub": a - b, "mul": a * b, "div": a / b}[op], None


def _fuzz_containment(n_cases, seed):
    rng = random.Random(seed)
    vars_ = ["x", "y", "z"]
    violations = 0
    checked = 0
    while checked < n_cases:
        expr, _ = _random_expr(rng, vars_, rng.randint(1, 4))
        box = {}
        point = {}
        for v in vars_:
            lo = rng.uniform(-3, 3)
            hi = lo + rng.uniform(0, 2)
            box[v] = Interval(lo, hi)
            point[v] = rng.uniform(lo, hi)
        prog = Program([expr])
        try:
            iv = prog.eval_interval(box)[0]
        except (DivisorStraddlesZero, NegativeSqrt):
            continue
        try:
            exact = prog.eval_float(point)[0]
        except (ValueError, ZeroDivisionError):
            continue
        if not math.isfinite(exact):
            continue
        checked += 1
        if not (iv.lo <= exact <= iv.hi):
            violations += 1
    return checked, violations


def test_containment_fuzz_quick():
    checked, violations = _fuzz_containment(3000, seed=20240817)
    assert checked == 3000
    assert violations == 0


# --- branch and bound ------------------------------------------------------------

def test_certify_positive_simple():
    x = Var("x")
    obj = (x - Const(1.0)).sq()
    cert = certify_positive(obj, Box.from_dict({"x": Interval(2, 3)}))
    assert isinstance(cert, rigor.PositivityCertificate)
    assert cert.min_bound >= 1.0 - 1e-9


def test_certify_positive_survivor_localizes_root():
    x = Var("x")
    obj = (x.sq() - Const(2.0)).sq()
    out = certify_positive(obj, Box.from_dict({"x": Interval(1, 2)}),
                           width_floor=1e-6)
    assert isinstance(out, Undecided)
    hit = [b for b in out.surviving_boxes
           if b.interval("x").lo <= math.sqrt(2) <= b.interval("x").hi]
    assert hit
    assert all(abs(b.interval("x").mid - math.sqrt(2)) < 1e-4
               for b in out.surviving_boxes)


def test_certify_positive_deterministic():
    x, y = Var("x"), Var("y")
    obj = (x * y - Const(0.7)).sq() + (x - y).sq()
    box = Box.from_dict({"x": Interval(0.5, 1.5), "y": Interval(0.5, 1.5)})
    a = certify_positive(obj, box, width_floor=1e-3)
    b = certify_positive(obj, box, width_floor=1e-3)
    ja = json.dumps({"kind": a.to_json()["kind"],
                     "boxes": a.to_json().get("surviving_boxes", a.to_json().get("cover"))},
                    sort_keys=True)
    jb = json.dumps({"kind": b.to_json()["kind"],
                     "boxes": b.to_json().get("surviving_boxes", b.to_json().get("cover"))},
                    sort_keys=True)
    assert ja == jb


def test_certificate_replay_and_sampling_soundness():
    x, y = Var("x"), Var("y")
    obj = (x.sq() + y.sq() - Const(0.1)).sq()
    box = Box.from_dict({"x": Interval(1.0, 2.0), "y": Interval(1.0, 2.0)})
    cert = certify_positive(obj, box)
    assert isinstance(cert, rigor.PositivityCertificate)
    prog = Program([obj])
    rng = random.Random(5)
    for leaf, bound in cert.cover:
        # replay: fresh interval evaluation reproduces a positive lower bound
        again = prog.eval_interval(leaf.as_dict())[0]
        assert again.lo > 0
        assert again.lo == pytest.approx(bound, rel=1e-12)
        # sampling: no objective value at or below zero
        d = leaf.as_dict()
        for _ in range(20):
            pt = {n: rng.uniform(iv.lo, iv.hi) for n, iv in d.items()}
            assert prog.eval_float(pt)[0] > 0


def test_budget_exhausted():
    x, y = Var("x"), Var("y")
    obj = (x - y).sq()
    box = Box.from_dict({"x": Interval(0, 1), "y": Interval(0, 1)})
    with pytest.raises(BudgetExhausted) as err:
        certify_positive(obj, box, width_floor=1e-9, budget=50)
    assert err.value.boxes_remaining


def test_box_split_and_provenance():
    b = Box.from_dict({"x": Interval(0, 4), "y": Interval(0, 1)}, provenance=("case-7",))
    lo, hi = b.split()
    assert lo.interval("x").hi == pytest.approx(2.0)
    assert hi.interval("x").lo == pytest.approx(2.0)
    assert lo.provenance == ("case-7",)
    assert b.max_width == 4.0


def test_solid_angle_interval():
    half_pi = pi_multiple(1, 2)
    omega = solid_angle_interval(half_pi, half_pi, half_pi)
    assert omega.lo <= math.pi / 2 <= omega.hi
    assert omega.width < 1e-14
    ratio = steradian_count_interval(omega)
    assert ratio.lo <= 8.0 <= ratio.hi
    with pytest.raises(OmegaStraddlesZero):
        steradian_count_interval(Interval(-0.1, 0.1))
