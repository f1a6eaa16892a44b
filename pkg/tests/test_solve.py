import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from abelfe.equation import make_equation
from abelfe.errors import BlowUp, DomainExit, InvalidEquation, MaxDepth
from abelfe.instances import instance_rng, random_equation
from abelfe.solve import (
    Trajectory,
    finite_difference_sensitivities,
    integrate,
    quadrature,
    sensitivities,
    solve_at,
)


def test_exponential():
    eq = make_equation(1, [("1", 1)], 1)
    assert integrate(eq, 1.0, 1e-10).z_end == pytest.approx(math.e, abs=1e-9)


def test_pole_before_blow_up():
    eq = make_equation(1, [("1", 2)], 1)
    assert integrate(eq, 0.5, 1e-10).z_end == pytest.approx(2.0, abs=1e-9)


def test_blow_up_keeps_partial_trajectory():
    eq = make_equation(1, [("1", 2)], 1)
    with pytest.raises(BlowUp) as info:
        integrate(eq, 1.0, 1e-10)
    traj = info.value.trajectory
    assert traj.status == "blow_up"
    assert traj.x_end < 1.0 and traj.x_end > 0.999
    assert all(b > a for a, b in zip(traj.xs, traj.xs[1:]))


def test_domain_exit_for_fractional_exponent():
    # z' = -z^(1/2), z(0) = 1 reaches 0 at x = 2
    eq = make_equation(1, [("-1", "1/2")], 1)
    with pytest.raises(DomainExit) as info:
        integrate(eq, 3.0, 1e-9)
    assert info.value.trajectory.status == "domain_exit"
    assert all(z > 0 for z in info.value.trajectory.zs)


def test_domain_exit_for_nonpositive_rhs_with_n_above_one():
    with pytest.raises(DomainExit):
        integrate(make_equation(2, [("-1", 1)], 1), 1.0, 1e-9)
    # z'^2 = 1 - x: right-hand side changes sign at x = 1
    with pytest.raises(DomainExit) as info:
        integrate(make_equation(2, [("1-x", 0)], 1), 2.0, 1e-9)
    assert info.value.trajectory.x_end <= 1.0 + 1e-9


def test_principal_root_for_n_two():
    # (z')^2 = z  =>  z = (1 + x/2)^2
    eq = make_equation(2, [("1", 1)], 1)
    assert integrate(eq, 1.0, 1e-11).z_end == pytest.approx(2.25, rel=1e-9)


@pytest.mark.parametrize("tol", [0.0, 1e-13, 1e-2])
def test_tolerance_range(tol):
    with pytest.raises(ValueError):
        integrate(make_equation(1, [("1", 1)], 1), 1.0, tol)


def test_x_end_must_exceed_x0():
    with pytest.raises(ValueError):
        integrate(make_equation(1, [("1", 1)], 1, x0=1), 0.5)


def test_trajectory_csv():
    traj = integrate(make_equation(1, [("1", 1)], 1), 0.1, 1e-8)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "x,z"
    assert lines[1] == "0,1"
    x, z = map(float, lines[-1].split(","))
    assert x == 0.1 and z == traj.z_end


def test_checkpoints_are_samples():
    xs = [0.05, 0.1, 0.25]
    traj = integrate(make_equation(1, [("x", 2), ("1", 0)], 1), 0.3, 1e-9, checkpoints=xs)
    for x in xs:
        traj.value_at(x)
    with pytest.raises(KeyError):
        Trajectory((0.0, 1.0), (1.0, 2.0), 1e-8).value_at(0.5)


@pytest.mark.parametrize("index", range(8))
def test_against_scipy(index):
    eq = random_equation(instance_rng(11, "scipy", index))
    xs = [0.1, 0.2, 0.3]
    ref = solve_ivp(lambda x, y: [eq.rhs(x, y[0])], (0, 0.3), [float(eq.z0)], method="DOP853",
                    rtol=1e-13, atol=1e-13, t_eval=xs)
    assert solve_at(eq, xs, 1e-11) == pytest.approx(list(ref.y[0]), rel=1e-9)


def test_half_tolerance_changes_endpoint_little():
    eq = make_equation(1, [("1+x", 2), ("-1/2", "1/3")], "3/4")
    for tol in (1e-6, 1e-8, 1e-10):
        a = integrate(eq, 0.5, tol).z_end
        b = integrate(eq, 0.5, tol / 2).z_end
        assert abs(a - b) <= 10 * tol


def test_tolerance_monotone_against_closed_form():
    eq = make_equation(1, [("1", 2)], 1)
    errs = [abs(integrate(eq, 0.5, tol).z_end - 2.0) for tol in (1e-4, 5e-5, 2.5e-5, 1e-6, 5e-7, 1e-8, 5e-9)]
    # halving tol never makes the error worse (tiny slack for roundoff-level wiggle)
    for a, b in zip(errs, errs[1:]):
        assert b <= a * 1.05 + 1e-14


# sensitivities

def test_sensitivity_examples():
    s = sensitivities(make_equation(1, [("1", 1)], 1), 1.0)
    assert s.method == "variational"
    assert s.lambdas[0] == pytest.approx(1.0, rel=1e-8)
    assert s.omegas[0] == pytest.approx(0.5, rel=1e-8)


def test_sensitivities_reject_x_dependence():
    with pytest.raises(InvalidEquation):
        sensitivities(make_equation(1, [("x", 1)], 1), 1.0)
    with pytest.raises(InvalidEquation):
        sensitivities(make_equation(2, [("1", 1)], 1), 1.0, method="variational")


def _one_term_log(u, m, z0, X):
    # ln z for z' = u z^m
    if m == 1:
        return math.log(z0) + u * X
    return math.log(z0 ** (1 - m) + (1 - m) * u * X) / (1 - m)


@pytest.mark.parametrize("u, m, z0", [(0.5, 2.0, 1.0), (0.3, -0.5, 1.5), (-0.2, 0.5, 0.8), (0.7, 1.0, 2.0)])
def test_one_term_sensitivities_match_closed_form(u, m, z0):
    X = 0.3
    s = sensitivities(make_equation(1, [(u, m)], z0), X)
    h = 1e-6
    lam = (_one_term_log(u + h, m, z0, X) - _one_term_log(u - h, m, z0, X)) / (2 * h)
    if m == 1:
        # expanding the closed form around m = 1 gives uX(2 ln z0 + uX)/2
        om = u * X * (2 * math.log(z0) + u * X) / 2
    else:
        om = (_one_term_log(u, m + h, z0, X) - _one_term_log(u, m - h, z0, X)) / (2 * h)
    assert s.lambdas[0] == pytest.approx(lam, rel=1e-4)
    assert s.omegas[0] == pytest.approx(om, rel=1e-4, abs=1e-9)


@pytest.mark.parametrize("index", range(10))
def test_variational_against_finite_differences(index):
    eq = random_equation(instance_rng(3, "sens", index), coefficients="constant")
    var = sensitivities(eq, 0.3)
    fd = finite_difference_sensitivities(eq, 0.3)
    assert var.z_end == pytest.approx(fd.z_end, rel=1e-9)
    assert list(var.lambdas) == pytest.approx(list(fd.lambdas), rel=1e-3, abs=1e-9)
    assert list(var.omegas) == pytest.approx(list(fd.omegas), rel=1e-3, abs=1e-9)


def test_finite_difference_mode_for_n_two():
    # (z')^2 = u z  =>  z = (sqrt(z0) + sqrt(u) X / 2)^2, so d ln z / du = X / (sqrt(u)(sqrt(z0) + sqrt(u) X/2))
    u, z0, X = 0.5, 1.0, 0.3
    s = sensitivities(make_equation(2, [(u, 1)], z0), X, tol=1e-12)
    assert s.method == "finite-difference"
    exact = X / (math.sqrt(u) * (math.sqrt(z0) + math.sqrt(u) * X / 2)) / 2
    assert s.lambdas[0] == pytest.approx(exact, rel=1e-6)


# quadrature

def test_quadrature_examples():
    assert quadrature(lambda x: x * x, 0, 1, 1e-12) == pytest.approx(1 / 3, abs=1e-12)
    assert quadrature(math.exp, 0, 1, 1e-10) == pytest.approx(math.e - 1, abs=1e-10)
    assert quadrature(math.sin, 0, math.pi, 1e-10) == pytest.approx(2.0, abs=1e-10)
    assert quadrature(math.exp, 1, 0, 1e-10) == pytest.approx(1 - math.e, abs=1e-10)
    assert quadrature(math.exp, 2, 2) == 0.0


def test_quadrature_max_depth():
    with pytest.raises(MaxDepth):
        quadrature(lambda x: 0.0 if x < 0.3 else 1.0, 0, 1, 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5), st.floats(-1, 1), st.floats(0.1, 2))
def test_quadrature_polynomials(coeffs, a, width):
    b = a + width

    def f(x):
        return sum(c * x**k for k, c in enumerate(coeffs))

    exact = sum(c * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, c in enumerate(coeffs))
    assert quadrature(f, a, b, 1e-11) == pytest.approx(exact, abs=1e-10)
