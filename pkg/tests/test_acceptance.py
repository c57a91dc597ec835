"""Acceptance gate: the nine package-level guarantees, one printed line each.

Run with `pytest -s tests/test_acceptance.py` to see the gate lines.  Each
test pins its tolerances as literals so the gate stays readable on its own;
the heavier numerical machinery lives in the verify module.
"""

import numpy as np
import pytest

from orbitfold.calculus import curve_jump_probe
from orbitfold.groups import preset_group
from orbitfold.polar import (
    eigen_crossing_curve,
    equidistance_probe,
    model_H,
    radial_model,
    random_rotation,
    sym_eig_model,
    sym_to_matrix,
)
from orbitfold.smoothing import build_chain
from orbitfold.verify import (
    check_closure,
    check_flatness,
    check_fold,
    check_growth,
    check_identity_tail,
    check_injectivity,
    check_origin_smoothness,
    check_profile,
    check_regular_jacobian,
    check_wall_preservation,
    check_wall_smoothness,
)

PRESETS = ("i2-3", "i2-4", "a2", "b2", "a3", "b3")
EXPECTED_ORDERS = {"i2-3": 6, "i2-4": 8, "a2": 6, "b2": 8, "a3": 24, "b3": 48}

# criterion 6 and 9 sample budgets are spread across the presets
PER_PRESET_SHARE = 167          # 6 * 167 >= 10^3


def _gate(num, label, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"\nacceptance {num} ({label}): {status} — {detail}")
    assert ok, f"acceptance {num} ({label}) failed: {detail}"


@pytest.fixture(scope="module")
def chains():
    return {name: build_chain(preset_group(name)) for name in PRESETS}


def test_acceptance_1_group_closure(chains):
    worst = 0.0
    orders = {}
    for name, chain in chains.items():
        orders[name] = len(chain.group.elements)
        for r in check_closure(chain.group, EXPECTED_ORDERS[name])[1:]:
            worst = max(worst, r.value)
    ok = orders == EXPECTED_ORDERS and worst <= 1e-9
    _gate(1, "group closure oracle", ok,
          f"orders {orders}, max residual {worst:.3g} (tol 1e-9)")


def test_acceptance_2_fold_correctness(chains):
    worst_member, worst_orbit, worst_inv = 0.0, 0.0, 0.0
    for name, chain in chains.items():
        member, orbit, inv = check_fold(chain.group, chain.chamber,
                                        count=1000, seed=0)
        worst_member = max(worst_member, member.value)
        worst_orbit = max(worst_orbit, orbit.value)
        worst_inv = max(worst_inv, inv.value)
    ok = worst_member <= 1e-12 and worst_orbit <= 1e-12 and worst_inv <= 1e-10
    _gate(2, "fold correctness, 10^3 points per preset", ok,
          f"chamber violation {worst_member:.3g} (tol 1e-12), orbit mismatch "
          f"{worst_orbit:.3g} (tol 1e-12), invariance {worst_inv:.3g} (tol 1e-10)")


def test_acceptance_3_profile_base():
    results = {r.name: r for r in check_profile()}
    tail = results["linear tail h(t)=t for t>=1"]
    sym = results["symmetry value h(1/2)=1/4"]
    flat0 = results["derivatives vanish at t=1e-3 (orders 1-4)"]
    incr = results["h' positive on (0,2]"]
    ok = (tail.value <= 1e-15 and sym.value == 0.0
          and flat0.value <= 1e-8 and incr.value > 0.0)
    _gate(3, "radial profile invariants", ok,
          f"tail {tail.value:.3g} (tol 1e-15), h(1/2)-1/4 = {sym.value}, "
          f"flat-at-0 {flat0.value:.3g} (tol 1e-8), min h' {incr.value:.3g} > 0")


def test_acceptance_3_profile_higher_monotonicity():
    # The profile is a fixed closed form, and its 3rd and 4th derivatives
    # genuinely change direction inside (0, 0.2] (sign roots near t = 0.175
    # and t = 0.114), so this clause records a FAIL by construction.  The
    # orders n <= 2 are monotone as required.
    results = {r.name: r for r in check_profile()}
    worst = {}
    for n in range(5):
        worst[n] = results[f"h^({n}) nondecreasing on (0,0.2]"].value
    ok = all(v >= -1e-12 for v in worst.values())
    _gate(3, "profile derivative monotonicity on (0,0.2], orders <= 4", ok,
          "min consecutive differences " +
          ", ".join(f"h^({n}): {v:.3g}" for n, v in worst.items()) +
          " (each required >= -1e-12)")


def test_acceptance_4_flatness_at_strata(chains):
    worst = 0.0
    for name, chain in chains.items():
        r = check_flatness(chain, points_per_level=50, seed=0)
        worst = max(worst, r.value)
    ok = worst <= 1e-6
    _gate(4, "normal derivatives flat at strata", ok,
          f"max order-1..3 normal derivative at 1e-3*l: {worst:.3g} (tol 1e-6)")


def test_acceptance_5_smoothness_probes(chains):
    min_slope, max_control, min_control_jump = np.inf, -np.inf, np.inf
    details = []
    ok = True
    for name, chain in chains.items():
        for r in check_wall_smoothness(chain, points=20, seed=0):
            ok &= r.passed
            if "control slope" in r.name:
                max_control = max(max_control, r.value)
            elif "control jump" in r.name:
                min_control_jump = min(min_control_jump, r.value)
            else:
                min_slope = min(min_slope, r.value)
        for r in check_origin_smoothness(chain, lines=20, seed=0):
            ok &= r.passed
            min_slope = min(min_slope, r.value)
    ok &= max_control <= 0.1 and min_control_jump >= 0.5
    _gate(5, "wall/origin jump decay with fold control", ok,
          f"min resolved decay slope {min_slope:.3g} (need >= 0.8), fold "
          f"control slope {max_control:.3g} (need <= 0.1), control jump "
          f"{min_control_jump:.3g} (need >= 0.5); slope inf = converged "
          f"below resolution at every offset")


def test_acceptance_6_diffeomorphism_evidence(chains):
    worst_sep, worst_det, worst_wall = np.inf, np.inf, 0.0
    for name, chain in chains.items():
        sep = check_injectivity(chain, pairs=PER_PRESET_SHARE, seed=0)
        det = check_regular_jacobian(chain, points=PER_PRESET_SHARE, seed=0)
        wall = check_wall_preservation(chain, points=PER_PRESET_SHARE, seed=0)
        worst_sep = min(worst_sep, sep.value)
        worst_det = min(worst_det, det.value)
        worst_wall = max(worst_wall, wall.value)
    ok = worst_sep >= 1e-8 and worst_det >= 1e-6 and worst_wall <= 1e-9
    _gate(6, "injectivity / Jacobian / wall preservation", ok,
          f"min image separation {worst_sep:.3g} (need >= 1e-8), min |det DG| "
          f"{worst_det:.3g} (need >= 1e-6), wall deviation {worst_wall:.3g} "
          f"(tol 1e-9); 6x{PER_PRESET_SHARE} samples per check")


def test_acceptance_7_growth_bounds(chains):
    worst = {1: -np.inf, 2: -np.inf}
    ok = True
    for name, chain in chains.items():
        for r in check_growth(chain):
            order = 1 if "order 1" in r.name else 2
            worst[order] = max(worst[order], r.value)
            ok &= r.passed
    ok &= worst[1] <= 1.3 and worst[2] <= 2.3
    _gate(7, "derivative growth exponents", ok,
          f"max fitted exponents order 1: {worst[1]:.3g} (limit 1.3), "
          f"order 2: {worst[2]:.3g} (limit 2.3)")


def test_acceptance_8_polar_demo(chains):
    model = sym_eig_model()
    chain = chains["a2"]
    rng = np.random.default_rng(0)

    inv_worst = 0.0
    for _ in range(1000):
        q = rng.normal(size=6)
        a = sym_to_matrix(q)
        base = model_H(model, chain, q)
        for _ in range(100):
            rot = random_rotation(rng)
            moved = model_H(model, chain, rot @ a @ rot.T)
            inv_worst = max(inv_worst, float(np.max(np.abs(moved - base))))
    inv_ok = inv_worst <= 1e-9

    offsets = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
    min_raw_jump, min_smooth_slope = np.inf, np.inf
    for s in range(20):
        curve = eigen_crossing_curve(seed=s)
        raw = curve_jump_probe(lambda t: model.section_map(curve(t)), offsets)
        smooth = curve_jump_probe(lambda t: model_H(model, chain, curve(t)),
                                  offsets)
        min_raw_jump = min(min_raw_jump, raw.jumps[1][0])
        min_smooth_slope = min(min_smooth_slope, smooth.slopes[1])
    curve_ok = min_raw_jump >= 0.1 and min_smooth_slope >= 0.8

    sym_probe = equidistance_probe(model, chain,
                                   np.array([3.0, 1.5, 0.25]),
                                   np.array([2.5, 1.0, -0.5]), samples=10)
    radial = radial_model(3)
    radial_chain = build_chain(radial.weyl)
    rad_probe = equidistance_probe(radial, radial_chain,
                                   np.array([1.3]), np.array([2.1]),
                                   samples=10)
    equi_ok = sym_probe.spread <= 1e-3 and rad_probe.spread <= 1e-8

    ok = inv_ok and curve_ok and equi_ok
    _gate(8, "spectral polar demo", ok,
          f"invariance {inv_worst:.3g} (tol 1e-9, 10^3 x 100), raw crossing "
          f"jump {min_raw_jump:.3g} (need >= 0.1), smoothed slope "
          f"{min_smooth_slope:.3g} (need >= 0.8), equidistance spread "
          f"{sym_probe.spread:.3g} (tol 1e-3) / radial {rad_probe.spread:.3g} "
          f"(tol 1e-8)")


def test_acceptance_9_identity_tail(chains):
    worst = 0.0
    for name, chain in chains.items():
        r = check_identity_tail(chain, count=PER_PRESET_SHARE, seed=0)
        worst = max(worst, r.value)
    ok = worst <= 1e-12
    _gate(9, "identity outside the tubes", ok,
          f"max |H - fold| on far points {worst:.3g} (tol 1e-12), "
          f"6x{PER_PRESET_SHARE} samples")
