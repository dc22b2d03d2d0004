import math

import numpy as np
import pytest

from onofri import (
    HarmonicField,
    ManifoldPoint,
    build_extremal,
    chart_params,
    dilation,
    dirichlet_energy,
    distance_to_manifold,
    grad_distance,
    psi_field,
    rotation,
    stability_check,
)
from onofri.sampling import random_conformal, random_field
from onofri.stability import BETA_BOUND, LOG_LAMBDA_BOUND


def test_manifold_point_map():
    m = ManifoldPoint(math.log(2.0), 0.5, -0.25)
    tau = m.to_map()
    # plane action z -> lambda (z + beta)
    z = 0.3 + 0.1j
    expect = 2.0 * (z + complex(0.5, -0.25))
    assert abs(tau.plane_image(z) - expect) < 1e-14


def test_chart_params_round_trip(rng):
    m = ManifoldPoint(0.4, -1.2, 0.7)
    back = chart_params(m.to_map())
    assert abs(back.log_lambda - m.log_lambda) < 1e-12
    assert abs(back.beta1 - m.beta1) < 1e-12
    assert abs(back.beta2 - m.beta2) < 1e-12
    # left rotations do not move the chart point
    rho = rotation([0.3, -0.5, np.sqrt(1 - 0.34)], 1.3)
    back2 = chart_params(rho.compose(m.to_map()))
    assert abs(back2.log_lambda - m.log_lambda) < 1e-10
    assert abs(back2.beta1 - m.beta1) < 1e-10


def test_chart_covers_psi_of_composition(rng, grid48):
    # the chart map in the coset of tau has the same Jacobian, hence the same psi
    tau = random_conformal(rng, lam_eff_cap=6.0)
    m = chart_params(tau)
    j1 = tau.jacobian(grid48.nodes)
    j2 = m.to_map().jacobian(grid48.nodes)
    assert np.max(np.abs(j1 - j2)) < 1e-10


def test_grad_distance_constant_shift(grid72):
    e = build_extremal(dilation(2.0))
    u = psi_field(e, 24, grid72).field + HarmonicField.constant(5.0)
    m = ManifoldPoint(math.log(2.0), 0.0, 0.0)
    assert grad_distance(u, m, 24, grid72) < 1e-7


def test_grad_distance_trivial(grid48):
    assert grad_distance(HarmonicField.zero(4), ManifoldPoint(0, 0, 0), 4, grid48) < 1e-20


def test_grad_distance_off_manifold(grid72):
    e = build_extremal(dilation(2.0))
    psi_energy = dirichlet_energy(psi_field(e, 24, grid72).field)
    d = grad_distance(HarmonicField.zero(4), ManifoldPoint(math.log(2.0), 0, 0), 24, grid72)
    assert abs(d - psi_energy) < 1e-9
    assert d > 0.01


def test_distance_on_manifold(grid72):
    u = psi_field(build_extremal(dilation(2.0)), 32, grid72).field
    res = distance_to_manifold(u, 32, grid72)
    assert res.distance < 1e-7
    assert abs(res.argmin.log_lambda - math.log(2.0)) < 1e-4
    assert abs(res.argmin.beta1) < 1e-4 and abs(res.argmin.beta2) < 1e-4
    assert not res.boundary_hit


def test_distance_zero_field(grid48):
    res = distance_to_manifold(HarmonicField.zero(4), 4, grid48)
    assert res.distance < 1e-12


def test_distance_perturbation_bound(grid72):
    # adding a pure degree-3 mode of energy 12 * eps^2 moves the field that
    # far at most; the optimizer must do at least as well as staying put
    eps = 0.05
    u = psi_field(build_extremal(dilation(2.0)), 24, grid72).field
    pert = HarmonicField.from_entries(3, {(3, 3): eps})
    bumped = u + pert
    pert_energy = dirichlet_energy(pert)
    assert abs(pert_energy - 12 * eps**2) < 1e-15
    res = distance_to_manifold(bumped, 24, grid72)
    assert res.distance <= pert_energy * 1.000001
    assert res.distance >= pert_energy * 0.95


def test_distance_chart_completeness(rng, grid72):
    # the (lambda, beta) family reaches psi of arbitrary bounded compositions
    for _ in range(3):
        tau = random_conformal(rng, lam_eff_cap=6.0, allow_reflect=True)
        u = psi_field(build_extremal(tau), 32, grid72).field
        res = distance_to_manifold(u, 32, grid72)
        assert res.distance < 1e-6
        target = chart_params(tau)
        assert abs(res.argmin.log_lambda - target.log_lambda) < 1e-3


def test_stability_zero_field():
    rep = stability_check(HarmonicField.zero(4))
    assert abs(rep.deficit) < 1e-12
    assert rep.distance < 1e-10
    assert abs(rep.slack) < 1e-10


def test_stability_on_manifold(grid72):
    u = psi_field(build_extremal(dilation(2.0)), 32, grid72).field
    rep = stability_check(u, 32, grid72)
    assert rep.deficit <= 1e-8
    assert rep.distance <= 1e-7
    assert abs(rep.slack) <= 1e-7


def test_stability_random_sweep(rng):
    for k in range(4):
        u = random_field(rng, 6, 0.4)
        rep = stability_check(u, seed=k)
        assert rep.deficit >= -1e-9
        assert rep.distance >= 0.0
        assert rep.slack >= -1e-8
        assert rep.trace["converged"]


def test_warm_start_dominance(rng):
    u = random_field(rng, 6, 0.4)
    rep = stability_check(u)
    warm = next(s for s in rep.trace["distance"]["starts"] if s["kind"] == "recentering")
    assert warm["start_value"] <= 6.0 * rep.deficit + 1e-9


def test_boundary_reporting(grid48):
    # a field so far out that the identity start's box is binding is still
    # reported, not fatal
    res = distance_to_manifold(HarmonicField.zero(4), 4, grid48, maxfev=8)
    assert isinstance(res.boundary_hit, bool)
    assert res.nfev > 0


def test_box_constants():
    assert LOG_LAMBDA_BOUND == pytest.approx(math.log(16.0))
    assert BETA_BOUND == 8.0
    assert ManifoldPoint(0, 0, 0).in_box()
    assert not ManifoldPoint(LOG_LAMBDA_BOUND, 0, 0).in_box()


def test_parallel_starts_are_deterministic(rng, grid48):
    u = random_field(rng, 5, 0.4)
    serial = distance_to_manifold(u, 5, grid48, jobs=1)
    threaded = distance_to_manifold(u, 5, grid48, jobs=3)
    assert serial.distance == threaded.distance
    assert serial.argmin == threaded.argmin


def test_stability_report_json(rng):
    import json

    rep = stability_check(random_field(rng, 4, 0.3))
    d = json.loads(rep.to_json())
    assert set(d) == {"deficit", "distance", "slack", "argmin", "trace"}
    assert set(d["argmin"]) == {"log_lambda", "beta1", "beta2"}
