import math

import numpy as np
import pytest

from onofri import (
    HarmonicField,
    build_extremal,
    cg_bound_slack,
    chang_gui_report,
    chang_gui_value,
    dilation,
    dirichlet_energy,
    dirichlet_invariance_check,
    exp_moments,
    identity_map,
    onofri_value,
    psi_field,
    rotation,
    transform,
)
from onofri.sampling import random_conformal, random_field
from onofri.sphere import ConvergenceError, RefinementPolicy


def w3_times(eps):
    return HarmonicField.from_entries(1, {(1, 0): eps / math.sqrt(3.0)})


def test_onofri_trivial_cases():
    assert abs(onofri_value(1.0, HarmonicField.zero(2))) < 1e-14
    assert abs(onofri_value(0.7, HarmonicField.constant(0.9))) < 1e-13


def test_onofri_equality_case(grid72):
    # J_1 vanishes on (1/2) ln J up to additive constants
    e = build_extremal(dilation(2.0))
    half_log_j = psi_field(e, 32, grid72).field * (2.0 / 3.0)
    assert abs(onofri_value(1.0, half_log_j)) < 1e-6


def test_chang_gui_trivial():
    rep = chang_gui_report(2.0 / 3.0, HarmonicField.zero(3))
    assert rep.value == 0.0
    assert rep.lorentzian == pytest.approx(1.0, abs=1e-14)
    assert rep.converged
    # constants cancel exactly as well
    rep_c = chang_gui_report(2.0 / 3.0, HarmonicField.constant(1.3))
    assert abs(rep_c.value) < 1e-12


def test_chang_gui_report_assembly(rng):
    u = random_field(rng, 5, 0.4)
    rep = chang_gui_report(1.0, u)
    assert rep.energy == pytest.approx(dirichlet_energy(u), abs=1e-15)
    assert rep.mean == pytest.approx(u.mean(), abs=1e-15)
    assert rep.value == pytest.approx(
        rep.alpha * rep.energy + 2 * rep.mean - 0.5 * math.log(rep.lorentzian), abs=1e-14
    )
    assert rep.lorentzian > 0
    assert rep.grid["theta_count"] > 0


def test_chang_gui_zero_on_extremal(grid72):
    proj = psi_field(build_extremal(dilation(2.0)), 32, grid72)
    assert abs(chang_gui_value(2.0 / 3.0, proj.field)) < 1e-8


def test_chang_gui_small_perturbation():
    u = w3_times(0.1)
    rep = chang_gui_report(2.0 / 3.0, u)
    assert rep.value >= 0.0


def test_nonconvergence_raises(rng):
    u = random_field(rng, 5, 0.4)
    starved = RefinementPolicy(start_band=8, theta_cap=9)
    with pytest.raises(ConvergenceError):
        chang_gui_report(1.0, u, policy=starved)
    rep = chang_gui_report(1.0, u, policy=starved, strict=False)
    assert not rep.converged


def test_exp_moments_constant():
    mom = exp_moments(HarmonicField.constant(0.5))
    assert abs(mom.mass - math.exp(1.0)) < 1e-12
    assert np.max(np.abs(mom.moment)) < 1e-12


def test_transform_identity(grid72, rng):
    u = random_field(rng, 6, 0.4)
    moved = transform(u, identity_map(), 6, grid72)
    assert np.max(np.abs(moved.field.coeffs - u.coeffs)) < 1e-12


def test_transform_of_zero_is_psi(grid72):
    tau = dilation(2.0)
    moved = transform(HarmonicField.zero(2), tau, 24, grid72)
    proj = psi_field(build_extremal(tau), 24, grid72)
    assert np.max(np.abs(moved.field.coeffs - proj.field.coeffs)) < 1e-10


def test_transform_tail_gate(grid48, rng):
    u = random_field(rng, 8, 0.5)
    with pytest.raises(ConvergenceError):
        transform(u, dilation(4.0), 8, grid48, tail_threshold=1e-10)


def test_conformal_invariance(grid104, rng):
    worst = 0.0
    for _ in range(3):
        u = random_field(rng, 8, 0.3)
        base = chang_gui_value(2.0 / 3.0, u)
        for _ in range(2):
            tau = random_conformal(rng, lam_eff_cap=3.0, allow_reflect=True)
            moved = transform(u, tau, 48, grid104).field
            worst = max(worst, abs(chang_gui_value(2.0 / 3.0, moved) - base))
    assert worst < 1e-6


def test_constant_shift_invariance(rng):
    u = random_field(rng, 5, 0.4)
    shifted = u + HarmonicField.constant(-0.8)
    assert abs(chang_gui_value(2.0 / 3.0, shifted) - chang_gui_value(2.0 / 3.0, u)) < 1e-10


def test_ordering_sharp_vs_classical(rng):
    # the Lorentzian quantity is at most the squared mass, so I >= J
    for _ in range(5):
        u = random_field(rng, 6, 0.5)
        assert chang_gui_value(1.0, u) >= onofri_value(1.0, u) - 1e-10


def test_cg_bound_trivial():
    assert abs(cg_bound_slack(1.0, HarmonicField.zero(2))) < 1e-14
    with pytest.raises(ValueError):
        cg_bound_slack(0.5, HarmonicField.zero(2))


def test_cg_bound_on_extremal(grid72):
    proj = psi_field(build_extremal(dilation(2.0)), 32, grid72)
    assert abs(cg_bound_slack(2.0 / 3.0, proj.field)) < 1e-8


@pytest.mark.parametrize("alpha", [2.0 / 3.0, 1.0, 2.0])
def test_cg_bound_random_sweep(alpha, rng):
    for _ in range(8):
        u = random_field(rng, 8, 0.5)
        assert cg_bound_slack(alpha, u) >= -1e-8


def test_dirichlet_invariance_rotation(grid48, rng):
    u = random_field(rng, 6, 0.5)
    check = dirichlet_invariance_check(u, rotation([0.0, 1.0, 0.0], 0.9), grid48)
    assert check.value < 1e-10


def test_dirichlet_invariance_dilation(grid72):
    u = HarmonicField.from_entries(1, {(1, 0): 1.0 / math.sqrt(3.0)})
    check = dirichlet_invariance_check(u, dilation(2.0), grid72, l_max=32)
    assert check.value < 1e-6
    assert check.tail_fraction < 1e-6


def test_dirichlet_invariance_constant(grid48):
    check = dirichlet_invariance_check(HarmonicField.constant(2.0), dilation(3.0), grid48)
    assert check.value < 1e-12


def test_report_json(rng):
    import json

    u = random_field(rng, 4, 0.3)
    rep = chang_gui_report(2.0 / 3.0, u)
    d = json.loads(rep.to_json())
    assert set(d) == {
        "alpha", "energy", "mean", "log_mass", "lorentzian", "value", "grid", "converged",
    }
