import math

import numpy as np
import pytest

from onofri import (
    HarmonicField,
    build_extremal,
    build_grid,
    com_of_exp,
    dilation,
    normalize,
    psi_field,
    recentering_map,
    rotation,
    solve_lambda0,
    solve_x0,
    transform,
    translation_to,
)
from onofri.normalize import transported_com
from onofri.sampling import random_conformal, random_field


def w3_times(eps):
    return HarmonicField.from_entries(1, {(1, 0): eps / math.sqrt(3.0)})


def test_com_of_exp_zero_field():
    assert np.max(np.abs(com_of_exp(HarmonicField.zero(2)))) < 1e-14


def test_com_of_exp_extremal(grid72):
    proj = psi_field(build_extremal(dilation(2.0)), 32, grid72)
    com = com_of_exp(proj.field)
    assert np.max(np.abs(com - [0.0, 0.0, -0.6])) < 1e-8


def test_com_of_exp_zonal_monotone():
    com = com_of_exp(w3_times(0.2))
    assert abs(com[0]) < 1e-12 and abs(com[1]) < 1e-12
    assert 0.0 < com[2] < 1.0


def test_solve_x0_symmetric():
    assert abs(solve_x0(HarmonicField.zero(2))) < 1e-14
    # antipodally symmetric field: even zonal harmonic
    even = HarmonicField.from_entries(2, {(2, 0): 0.4})
    assert abs(solve_x0(even)) < 1e-12


def test_solve_x0_translation_axis(grid72):
    proj = psi_field(build_extremal(translation_to([1.0, 0.0, 0.0])), 32, grid72)
    x0 = solve_x0(proj.field)
    assert abs(x0.imag) < 1e-10
    assert abs(x0.real) > 1e-3


def test_solve_lambda0_trivial():
    assert abs(solve_lambda0(HarmonicField.zero(2), 0j) - 1.0) < 1e-12


@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_solve_lambda0_undoes_dilation(mu, grid72):
    # composing with dilation(1/mu) makes the transported field constant
    proj = psi_field(build_extremal(dilation(mu)), 32, grid72)
    x0 = solve_x0(proj.field)
    assert abs(x0) < 1e-9
    lam = solve_lambda0(proj.field, x0)
    assert abs(lam - 1.0 / mu) < 1e-8


def test_solve_lambda0_direction():
    # mass of e^{2u} sits at the north pole, so g(1) = com3 > 0; g decreases
    # in lambda, hence the root lies above 1 (cross-checked by the residual)
    u = w3_times(0.3)
    lam = solve_lambda0(u, 0j)
    assert lam > 1.0
    com = transported_com(u, recentering_map(0j, lam))
    assert np.linalg.norm(com) < 1e-12
    assert np.linalg.norm(transported_com(u, recentering_map(0j, 1.0 / lam))) > 1e-2


def test_lambda0_methods_agree(rng):
    u = random_field(rng, 6, 0.4)
    x0 = solve_x0(u)
    lam_cf = solve_lambda0(u, x0, method="closed_form")
    lam_rf = solve_lambda0(u, x0, method="root_find")
    assert abs(lam_cf - lam_rf) < 1e-8
    assert abs(solve_lambda0(u, x0, method="hybrid") - lam_cf) < 1e-15
    with pytest.raises(ValueError):
        solve_lambda0(u, x0, method="newton")


def test_bisection_bracket_initializations(rng):
    u = random_field(rng, 6, 0.4)
    x0 = solve_x0(u)
    lams = [
        solve_lambda0(u, x0, method="root_find", bracket_init=b)
        for b in (0.2, 0.7, 1.0, 3.0, 8.0)
    ]
    assert max(lams) - min(lams) < 1e-8


def test_normalize_zero_field():
    res = normalize(HarmonicField.zero(2))
    assert abs(res.lambda0 - 1.0) < 1e-12
    assert abs(res.x0) < 1e-13
    assert res.residual_com_norm < 1e-12
    assert res.tau.is_identity(tol=1e-10)


def test_normalize_random_fields(rng):
    for _ in range(3):
        u = random_field(rng, 6, 0.4)
        res = normalize(u)
        assert res.residual_com_norm < 1e-10
        assert res.lambda0 > 0
        assert res.method in ("closed_form", "root_find", "hybrid")


def test_normalize_extremal_gives_constant(grid72, rng):
    tau = random_conformal(rng, lam_eff_cap=6.0)
    proj = psi_field(build_extremal(tau), 32, grid72)
    res = normalize(proj.field)
    assert res.residual_com_norm < 1e-10
    moved = transform(proj.field, res.tau, 32, grid72, tail_threshold=None)
    c = moved.field.coeffs.copy()
    c[0] = 0.0
    l = moved.field.degrees()
    assert float(np.sum(l * (l + 1) * c * c)) < 1e-7


def test_normalize_first_two_components_translation_only(rng):
    # x0 alone (lambda = 1) already kills the first two components
    u = random_field(rng, 6, 0.4)
    x0 = solve_x0(u)
    com = transported_com(u, recentering_map(x0, 1.0))
    assert abs(com[0]) < 1e-10 and abs(com[1]) < 1e-10


def test_normalize_zonal_field(rng):
    u = w3_times(0.25)
    res = normalize(u)
    assert abs(res.x0) < 1e-10
    assert res.lambda0 > 1.0
    assert res.residual_com_norm < 1e-10


def test_plane_pullback_against_disk_quadrature():
    # int over |x| <= 50 of (1+|x|^2)^-3 dx versus the sphere-side value
    # (pi/2) int (1 - w3) dw = pi/2, up to the analytic truncation deficit
    n = 2000
    t, wt = np.polynomial.legendre.leggauss(n)
    s = 25.0 * (t + 1.0)          # radius in [0, 50]
    ds = 25.0 * wt
    radial = float(np.sum(ds * s / (1 + s * s) ** 3)) * 2 * math.pi
    deficit = math.pi / (1 + 50.0**2) ** 2 / 2  # exact tail of the radial integral
    assert abs(radial - (math.pi / 2 - deficit)) < 1e-10
    assert abs(radial - math.pi / 2) < 3e-7


def test_normalization_result_json(rng):
    import json

    res = normalize(random_field(rng, 4, 0.3))
    d = json.loads(res.to_json())
    assert set(d) == {"x0", "lambda0", "tau", "residual_com_norm", "method"}
    assert len(d["x0"]) == 2


def test_uniqueness_up_to_rotation(rng):
    # rotating u about the x3-axis rotates x0 accordingly, lambda0 unchanged
    u = random_field(rng, 5, 0.4)
    res = normalize(u)
    from onofri.functionals import transform as tf

    grid = build_grid(72)
    rot = rotation([0.0, 0.0, 1.0], 0.9)
    u_rot = tf(u, rot, u.l_max + 0, grid, tail_threshold=None).field
    res_rot = normalize(u_rot)
    assert abs(res_rot.lambda0 - res.lambda0) < 1e-7
    assert abs(abs(res_rot.x0) - abs(res.x0)) < 1e-7
