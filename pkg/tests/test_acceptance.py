"""End-to-end acceptance checks at their stated tolerances.

Each test carries a ``criterion`` marker; the run summary prints one
PASS/FAIL line per criterion with the measured figures.
"""

import csv
import io
import json
import math
import time
from collections import Counter

import numpy as np
import pytest

from cli_cases import GOLDEN, ROOT
from conftest import random_block, random_system
from intreach.boundary import BoundaryParams, boundary_point, random_params
from intreach.cli import run
from intreach.errors import NonGenericLineError
from intreach.harness import (
    bang_bang_schedule,
    boundary_polygon,
    containment_audit,
    mc_volume,
    random_cloud,
    shoelace_area,
    simulate_endpoint,
)
from intreach.implicit import hankel_residual, implicit_poly, line_intersections, residual_scale
from intreach.model import BlockSpec, SystemSpec, load_spec
from intreach.poly import MultiPoly
from intreach.support import center, support, support_batch, supporting_point


@pytest.fixture
def fresh_symbolic_cache():
    implicit_poly.cache_clear()
    yield
    implicit_poly.cache_clear()


@pytest.mark.criterion(1, "quartic surface of the triple integrator, term for term")
def test_golden_quartic(fresh_symbolic_cache, detail):
    t0 = time.perf_counter()
    surf = implicit_poly(3)
    dt = time.perf_counter() - t0
    V = ("rho1", "rho2", "rho3")
    r1, r2, r3 = (MultiPoly.var(v, V) for v in V)
    expected = r3**4 - 4 * r3 * r1 + 3 * r2**2
    detail["text"] = f"{surf.poly}; {dt:.3f} s"
    assert dict(surf.poly.terms) == dict(expected.terms)
    assert dt < 1.0


@pytest.mark.criterion(2, "surface degree formula for r = 1..8")
def test_degree_formula(fresh_symbolic_cache, detail):
    t0 = time.perf_counter()
    got = {r: implicit_poly(r).poly.degree for r in range(1, 9)}
    dt = time.perf_counter() - t0
    want = {r: ((r - 1) // 2 + 1) * (r - (r - 1) // 2) for r in range(1, 9)}
    detail["text"] = f"degrees {list(got.values())}; {dt:.2f} s"
    assert got == want
    assert dt < 30.0


@pytest.mark.criterion(3, "Hankel determinant vanishes on both sheets, r = 2..5")
def test_hankel_vanishing(rng, detail):
    t0 = time.perf_counter()
    worst = 0.0
    for r in (2, 3, 4, 5):
        for sheet in (1, -1):
            for _ in range(1000):
                b = random_block(rng, r)
                t = float(rng.uniform(0.2, 3.0))
                x = boundary_point(b, BoundaryParams(sheet, random_params(rng, r, t)), t).x
                worst = max(worst, abs(hankel_residual(b, x, sheet, t)) / residual_scale(b, x, sheet, t))
    dt = time.perf_counter() - t0
    detail["text"] = f"worst relative residual {worst:.2e}; {dt:.1f} s"
    assert worst <= 1e-8
    assert dt < 60.0


@pytest.mark.criterion(4, "support value equals <y, supporting point>")
def test_duality(rng, detail):
    worst = 0.0
    for _ in range(1000):
        spec = random_system(rng, max_r=5)
        y = rng.normal(size=spec.d)
        h = support(spec, y)
        worst = max(worst, abs(float(y @ supporting_point(spec, y)) - h) / (1 + abs(h)))
    detail["text"] = f"worst {worst:.2e}"
    assert worst <= 1e-10


@pytest.mark.criterion(5, "boundary formula equals simulated bang-bang endpoint")
def test_boundary_matches_simulation(rng, detail):
    worst = 0.0
    for _ in range(1000):
        spec = random_system(rng, max_r=5)
        params = [BoundaryParams(int(rng.choice([-1, 1])), random_params(rng, b.r, spec.t)) for b in spec.blocks]
        x = simulate_endpoint(spec, bang_bang_schedule(spec, params))
        want = np.concatenate([boundary_point(b, p, spec.t).x for b, p in zip(spec.blocks, params)])
        worst = max(worst, float(np.abs(x - want).max()))
    detail["text"] = f"worst abs error {worst:.2e}"
    assert worst <= 1e-12


@pytest.mark.criterion(6, "l2 and l_inf two-input experiments: equal supports, sound clouds")
def test_two_input_ball_experiments(detail):
    t0 = time.perf_counter()
    pairs = [("planar_l2_inputs", "planar_linf_inputs"), ("spatial_l2_inputs", "spatial_linf_inputs")]
    notes = []
    ok = True
    for a, b in pairs:
        sa, sb = load_spec(ROOT / "recipes" / f"{a}.json"), load_spec(ROOT / "recipes" / f"{b}.json")
        Y = np.random.Generator(np.random.Philox(2024)).standard_normal((10_000, sa.d))
        same = np.array_equal(support_batch(sa, Y), support_batch(sb, Y))
        ok &= same
        for name, s in ((a, sa), (b, sb)):
            cloud = random_cloud(s, s.input_set, K=4, N=10_000, seed=1)
            rep = containment_audit(cloud, s, tol=1e-9)
            ok &= rep.violations.size == 0
            notes.append(f"{name}: {rep.violations.size} violations")
        notes.append(f"{a}/{b} supports equal: {same}")
    dt = time.perf_counter() - t0
    detail["text"] = "; ".join(notes) + f"; {dt:.1f} s"
    assert ok
    assert dt < 60.0


def _counts_through_interior(b, t, n, rng):
    c = center(b, t)
    counts = Counter()
    redrawn = 0
    while sum(counts.values()) < n:
        v = rng.standard_normal(b.r)
        try:
            li = line_intersections(b, c, v, t)
        except NonGenericLineError:
            redrawn += 1
            continue
        if not li.generic:
            redrawn += 1
            continue
        counts[li.total] += 1
    return counts, redrawn


@pytest.mark.criterion(7, "generic lines through an interior point: 4 hits for r = 2, 6 for r = 3")
def test_line_intersection_counts(rng, detail):
    b2 = BlockSpec(2, (0, 0), -1, 1)
    b3 = BlockSpec(3, (0, 0, 0), -1, 1)
    c2, n2 = _counts_through_interior(b2, 0.5, 100, rng)
    c3, n3 = _counts_through_interior(b3, 0.5, 100, rng)
    detail["text"] = f"r=2 counts {dict(c2)} ({n2} redrawn); r=3 counts {dict(c3)} ({n3} redrawn)"
    assert set(c2) == {4}
    assert set(c3) == {6}


@pytest.mark.criterion(8, "Monte Carlo volume vs boundary area; product rule")
def test_volume_cross_check(detail):
    b = BlockSpec(2, (0, 0), -1, 1)
    area = shoelace_area(boundary_polygon(b, 2.0, 10_000))
    est = mc_volume(SystemSpec([b], 2.0), N=1_000_000, seed=0)
    z = abs(est.total - area) / est.stderr

    b1, b2 = BlockSpec(2, (0.1, 0), -1, 1), BlockSpec(2, (0, 0), -0.5, 1.5)
    both = mc_volume(SystemSpec([b1, b2], 1.5), N=200_000, seed=1)
    v1 = mc_volume(SystemSpec([b1], 1.5), N=200_000, seed=2)
    v2 = mc_volume(SystemSpec([b2], 1.5), N=200_000, seed=3)
    prod = v1.total * v2.total
    se_prod = prod * math.hypot(v1.stderr / v1.total, v2.stderr / v2.total)
    zp = abs(both.total - prod) / math.hypot(both.stderr, se_prod)
    detail["text"] = (
        f"MC {est.total:.5f} +- {est.stderr:.5f} vs area {area:.7f} ({z:.2f} SE); "
        f"product {both.total:.4f} vs {prod:.4f} ({zp:.2f} SE)"
    )
    assert z <= 3
    assert zp <= 3


@pytest.mark.criterion(9, "CLI boundary output for the double-integrator figure vs golden CSV")
def test_cli_boundary_golden(monkeypatch, capsys, detail):
    monkeypatch.chdir(ROOT)
    assert run(["boundary", "--spec", "recipes/double_integrator.json"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# ")
    json.loads(lines[0][2:])
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    with open(GOLDEN / "double_integrator_boundary.csv") as fh:
        ref = list(csv.reader(fh))
    assert rows[0] == ref[0]
    got, want = np.array(rows[1:], float), np.array(ref[1:], float)
    err = float(np.abs(got - want).max()) if got.shape == want.shape else float("inf")
    detail["text"] = f"{len(got)} rows, max abs diff {err:.2e}"
    assert err <= 1e-12
