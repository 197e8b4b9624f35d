import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bb2sim import RHO
from bb2sim.errors import ValidationError
from bb2sim.hydro_model import (AXES, VARS, ActuatorState, CoefficientSet, DepthTable, PropellerModel,
                                coefficients_from_dict, control_surface_force, control_surface_forces,
                                deflection_law, hydrodynamic_breakdown, hydrodynamic_force, load_coefficients,
                                propeller_force, self_propulsion_advance_ratio, velocity_terms)
from bb2sim.rigid_body import MassProperties, VehicleState, rk4_step

from conftest import DATA, zero_coefficients


def random_set(rng, n_terms=50, signed=False):
    return CoefficientSet(rng.integers(0, 6, n_terms), rng.integers(0, 6, n_terms), rng.integers(0, 6, n_terms),
                          rng.normal(size=n_terms), np.full(n_terms, signed) if isinstance(signed, bool)
                          else signed)


def brute_force(cs, s):
    out = np.zeros(6)
    for a, j, k, c, sg in zip(cs.quad_axis, cs.quad_j, cs.quad_k, cs.quad_value, cs.quad_signed):
        out[a] += c * (abs(s[j]) if sg else s[j]) * s[k]
    return out


# --- velocity products ---------------------------------------------------------

def test_zero_motion_gives_zero_load(rng):
    cs = random_set(rng)
    cs.surface = rng.normal(size=(6, 5))
    cs.prop = PropellerModel(1.0, (0.3,), (0.05,))
    F, _ = hydrodynamic_force(cs, np.zeros(6), ActuatorState(np.zeros(5), 0.0))
    np.testing.assert_array_equal(F, 0.0)


def test_single_term():
    cs = CoefficientSet([1], [0], [5], [2.5])
    np.testing.assert_allclose(velocity_terms(cs, [3.0, 0, 0, 0, 0, 0.4]), [0, 2.5 * 3.0 * 0.4, 0, 0, 0, 0])


def test_velocity_terms_match_brute_force(rng):
    for _ in range(100):
        cs = random_set(rng, signed=rng.random(50) < 0.5)
        s = rng.normal(size=6) * 3
        ref = brute_force(cs, s)
        np.testing.assert_allclose(velocity_terms(cs, s), ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


@given(st.floats(-4, 4))
def test_velocity_terms_homogeneous_of_degree_two(alpha):
    rng = np.random.default_rng(7)
    s = rng.normal(size=6)
    plain = random_set(rng, 30, signed=False)
    signed = random_set(rng, 30, signed=True)
    np.testing.assert_allclose(velocity_terms(plain, alpha * s), alpha**2 * velocity_terms(plain, s),
                               rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(velocity_terms(signed, alpha * s), alpha * abs(alpha) * velocity_terms(signed, s),
                               rtol=1e-10, atol=1e-12)


# --- control surfaces --------------------------------------------------------

def test_control_surface_zero_cases():
    cs = CoefficientSet(surface=np.ones((6, 5)))
    np.testing.assert_array_equal(control_surface_force(cs, 4.0, 0.0, 2), 0.0)
    np.testing.assert_array_equal(control_surface_force(cs, 0.0, 0.2, 2), 0.0)


def test_control_surface_linear_law_sign_reversal():
    S = np.zeros((6, 5))
    S[2, 0] = -1.0
    cs = CoefficientSet(surface=S)
    assert control_surface_force(cs, 5.0, 0.1, 1)[2] == pytest.approx(-2.5)
    assert control_surface_force(cs, 5.0, -0.1, 1)[2] == pytest.approx(2.5)


def test_deflection_laws():
    assert deflection_law(-0.2, "linear") == -0.2
    assert deflection_law(-0.2, "literal") == pytest.approx(0.04)
    assert deflection_law(-0.2, "signed_quadratic") == pytest.approx(-0.04)
    with pytest.raises(ValueError):
        deflection_law(0.1, "cubic")


def test_surface_forces_sum_of_single_planes(rng):
    cs = CoefficientSet(surface=rng.normal(size=(6, 5)), deflection_law="signed_quadratic")
    d = rng.uniform(-0.5, 0.5, 5)
    total = sum(control_surface_force(cs, 3.0, d[l], l + 1) for l in range(5))
    np.testing.assert_allclose(control_surface_forces(cs, 3.0, d), total, rtol=1e-13)


# --- propeller ---------------------------------------------------------------

def test_propeller_zero_revolutions():
    cs = CoefficientSet(prop=PropellerModel(2.0, (0.4, -0.2), (0.05,)))
    np.testing.assert_array_equal(propeller_force(cs, 0.0, 3.0), 0.0)


def test_propeller_constant_thrust_coefficient():
    cs = CoefficientSet(prop=PropellerModel(1.0, (0.3,), (0.0,), j_range=(0.0, 10.0)))
    assert propeller_force(cs, 2.0, 0.5)[0] == pytest.approx(1025 * 4 * 0.3)


def test_propeller_reversal_uses_signed_square():
    cs = CoefficientSet(prop=PropellerModel(1.0, (0.3,), (0.0,), j_range=(-10.0, 10.0)))
    assert propeller_force(cs, -2.0, 0.5)[0] == pytest.approx(-1025 * 4 * 0.3)


def test_self_propulsion_steady_speed():
    d, a0, n, m = 10.0, 0.1, 2.0, 100.0
    cs = CoefficientSet([0], [0], [0], [-d], [True], prop=PropellerModel(1.0, (a0,), (0.0,), j_range=(0.0, 100.0)))
    mp = MassProperties(m)
    act = ActuatorState(np.zeros(5), n)
    state = VehicleState(velocity=[1.0, 0, 0, 0, 0, 0])
    for k in range(1200):
        state = rk4_step(state, lambda t, s: hydrodynamic_force(cs, s.velocity, act)[0], 0.05, mp, t=k * 0.05)
    u_star = np.sqrt(RHO * n**2 * a0 / d)
    assert state.velocity[0] == pytest.approx(u_star, rel=1e-3)


def test_self_propulsion_advance_ratio_solves_balance():
    cs = CoefficientSet(prop=PropellerModel(1.5, (0.4, -0.25), (0.0,), j_range=(0.0, 1.5)))
    d = 300.0
    J = self_propulsion_advance_ratio(cs, d)
    kt = 0.4 - 0.25 * J
    assert RHO * 1.5**2 * kt == pytest.approx(d * J**2, rel=1e-12)


# --- added mass and depth tables ---------------------------------------------

def test_added_mass_independent_of_motion(rng):
    A = -np.diag(rng.uniform(1, 5, 6))
    cs = CoefficientSet(added_mass=A)
    for _ in range(5):
        *_, AA = hydrodynamic_breakdown(cs, rng.normal(size=6), ActuatorState(rng.normal(size=5), 3.0))
        np.testing.assert_array_equal(AA, A)


def test_depth_table_reverts_beyond_deepest_knot():
    tab = DepthTable(np.array([0.0, 10.0, 20.0]), np.array([2.0, 1.5, 1.2]))
    assert tab(5.0) == pytest.approx(1.75)
    assert tab(20.0) == pytest.approx(1.2)
    assert tab(20.001) == 1.0
    cs = CoefficientSet(added_mass=-np.eye(6), added_mass_tables={(2, 2): tab})
    assert cs.added_mass_at(100.0)[2, 2] == -1.0
    assert cs.added_mass_at(0.0)[2, 2] == -2.0


# --- file format -------------------------------------------------------------

def test_prime_scaling():
    doc = zero_coefficients(units={"system": "prime", "length": 10.0, "rho": 1000.0},
                            quad_terms=[{"axis": "Y", "vars": ["u", "v"], "value": 0.01},
                                        {"axis": "N", "vars": ["u", "r"], "value": 0.002}],
                            added_mass=[{"axis": "Z", "var": "w", "value": -0.01}],
                            surfaces={"terms": [{"surface": 5, "axis": "M", "value": 0.001}]})
    cs = coefficients_from_dict(doc)
    assert velocity_terms(cs, [1, 1, 0, 0, 0, 0])[1] == pytest.approx(0.01 * 500 * 10**2)
    assert velocity_terms(cs, [1, 0, 0, 0, 0, 1])[5] == pytest.approx(0.002 * 500 * 10**4)
    assert cs.added_mass[2, 2] == pytest.approx(-0.01 * 500 * 10**3)
    assert cs.surface[4, 4] == pytest.approx(0.001 * 500 * 10**3)


def test_effective_mass_check_rejects_excess_added_mass():
    doc = zero_coefficients(added_mass=[{"axis": "X", "var": "u", "value": 1000.0}])
    with pytest.raises(ValidationError, match="positive definite"):
        coefficients_from_dict(doc)


def test_schema_errors_are_collected():
    doc = zero_coefficients(units={"system": "metric"})
    del doc["propeller"]
    with pytest.raises(ValidationError) as exc:
        coefficients_from_dict(doc, "c.json")
    fields = [f for _, f, _ in exc.value.issues]
    assert "$.units.system" in fields and "$" in fields


def test_asymmetric_added_mass_rejected():
    doc = zero_coefficients(added_mass=[{"axis": "Y", "var": "r", "value": -5.0}])
    with pytest.raises(ValidationError, match="symmetric"):
        coefficients_from_dict(doc)


def test_reference_set_loads_and_is_labeled():
    cs = load_coefficients(DATA / "reference_bb2.json")
    assert "NOT VALIDATED" in cs.name.upper() or "NOT VALIDATED" in (DATA / "reference_bb2.json").read_text()
    assert cs.mass.m == pytest.approx(RHO * 4440.0)
    assert cs.deflection_law == "linear"
    assert set(AXES) and set(VARS)
