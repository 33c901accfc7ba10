import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import one
from draws import FIVE, KERNEL_FAMILIES, draw_poly, draw_spec
from fracgreen.errors import ParameterError, StencilError, UnsupportedFamilyError
from fracgreen.greens import Family, KernelSpec, OrderSet
from fracgreen.report import VerifyReport
from fracgreen.solver import ThreePointSpec, solve_linear, solve_threepoint
from fracgreen.verify import (
    boundary_functionals, check_classical_reduction, check_positivity, check_seams,
    check_symmetry_lidstone, lidstone_gamma_fault, limit_at_zero, run_suite, verify_bcs,
    verify_residual,
)


def _solve(spec, h):
    if isinstance(spec, ThreePointSpec):
        return solve_threepoint(h, spec.alpha, spec.beta, spec.params, [0.0, 1.0])
    return solve_linear(spec, h, [0.0, 1.0])


def test_residual_classical():
    spec = KernelSpec("conjugate2")
    rep = verify_residual(solve_linear(spec, one), one, spec)
    assert rep.worst_magnitude <= 1e-5 and rep.passed


def test_residual_zero():
    spec = KernelSpec("cantilever4", OrderSet(0.5, 0.6, 0.7, 0.8))
    zero = lambda t: np.zeros_like(t)  # noqa: E731
    assert verify_residual(zero, zero, spec).worst_magnitude == 0.0
    assert verify_bcs(zero, spec).worst_magnitude == 0.0


def test_residual_detects_perturbation():
    spec = KernelSpec("rightfocal2", OrderSet(0.7, 0.8))
    x = solve_linear(spec, one)
    bad = lambda t: x(t) + 0.01 * t  # noqa: E731
    assert not verify_residual(bad, one, spec).passed


def test_residual_mesh_margin():
    spec = KernelSpec("conjugate2")
    x = solve_linear(spec, one)
    with pytest.raises(StencilError) as err:
        verify_residual(x, one, spec, interior_mesh=[0.01, 0.5])
    assert err.value.required_margin == 0.05
    with pytest.raises(ParameterError):
        verify_residual(x, one, spec, interior_mesh=[])


@pytest.mark.parametrize("family", FIVE + ("conjugate2", "rightfocal2"))
def test_solutions_satisfy_problem(family, rng):
    for _ in range(3):
        spec = draw_spec(rng, family)
        h, _ = draw_poly(rng)
        x = _solve(spec, h)
        assert verify_residual(x, h, spec).passed
        rep = verify_bcs(x, spec)
        assert rep.worst_magnitude <= 1e-5, rep.details


def test_bcs_known_non_solution():
    a = 0.6
    spec = KernelSpec("rightfocal2", OrderSet(a, 0.9))
    vals = boundary_functionals(lambda t: t ** a / a, spec)
    assert vals["left"] == 0.0
    assert vals["right"] == pytest.approx(1.0, rel=1e-8)
    assert not verify_bcs(lambda t: t ** a / a, spec).passed


def test_bcs_functional_names():
    spec = KernelSpec("cantilever4", OrderSet(0.5, 0.6, 0.7, 0.8))
    assert set(boundary_functionals(lambda t: np.zeros_like(t), spec)) == {
        "x(0)", "D^a x(0)", "D^b D^a x(1)", "D^g D^b D^a x(1)"}


@given(st.floats(0.2, 1.0), st.floats(0.2, 1.5), st.floats(-2, 2), st.floats(-2, 2))
def test_limit_at_zero_power_sums(p, q, c0, c1):
    # c0 + c1 t^p + t^(p+q) tends to c0
    got = limit_at_zero(lambda t: c0 + c1 * t ** p + t ** (p + q))
    assert got == pytest.approx(c0, abs=1e-8)


def test_positivity_examples():
    grid = np.linspace(0, 1, 101)
    assert check_positivity(KernelSpec("lidstone4"), grid).details["min_G"] > 0
    rf = KernelSpec("rightfocal3", OrderSet(0.5, 0.5), tau=0.5)
    rep = check_positivity(rf, grid)
    assert rep.passed and rep.details["min_G"] > 0
    cant = KernelSpec("cantilever4", OrderSet(0.4, 0.7, 0.9))
    rep = check_positivity(cant, grid)
    assert rep.passed and rep.details["min_G"] >= 0 and rep.details["max_excess"] <= 1e-12


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_positivity_random(family, rng):
    for _ in range(5):
        assert check_positivity(draw_spec(rng, family), np.linspace(0, 1, 41)).passed


def test_positivity_fails_below_threshold():
    rf = KernelSpec("rightfocal3", OrderSet(1.0, 1.0), tau=0.4)
    assert not check_positivity(rf).passed


def test_symmetry_examples():
    assert check_symmetry_lidstone(1.0, 1.0).worst_magnitude == 0.0
    assert check_symmetry_lidstone(0.5, 1.0).worst_magnitude <= 1e-12
    fault = lidstone_gamma_fault(0.5, 1.0, 0.9)
    assert not check_symmetry_lidstone(0.5, 1.0, kernel=fault).passed
    # with gamma = alpha the reconstruction is the symmetric kernel
    assert check_symmetry_lidstone(0.5, 1.0, kernel=lidstone_gamma_fault(0.5, 1.0, 0.5)).passed


@pytest.mark.parametrize("family", ["conjugate2", "rightfocal2", "cantilever4", "lidstone4"])
def test_classical_reduction(family):
    assert check_classical_reduction(KernelSpec(family)).worst_magnitude <= 1e-12


def test_classical_reduction_points_and_errors():
    assert KernelSpec("cantilever4")(0.5, 1.0) == pytest.approx(0.1041666666666667)
    assert KernelSpec("lidstone4")(0.5, 0.5) == pytest.approx(0.0208333333333333)
    with pytest.raises(ParameterError):
        check_classical_reduction(KernelSpec("conjugate2", OrderSet(0.5)))
    with pytest.raises(UnsupportedFamilyError):
        check_classical_reduction(KernelSpec("rightfocal3", tau=0.6))


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_seams(family, rng):
    assert check_seams(draw_spec(rng, family)).passed


def test_suite_passes_and_faults_are_caught():
    spec = KernelSpec("lidstone4", OrderSet(0.5, 0.5))
    assert all(r.passed for r in run_suite(spec))
    for fault in ("sign-flip", "perturb", "lidstone-gamma"):
        assert not all(r.passed for r in run_suite(spec, fault=fault)), fault
    with pytest.raises(ParameterError):
        run_suite(spec, fault="nope")
    with pytest.raises(UnsupportedFamilyError):
        run_suite(KernelSpec("conjugate2"), fault="lidstone-gamma")


def test_suite_threepoint():
    from fracgreen.solver import ThreePointParams
    spec = ThreePointSpec(0.8, 0.7, ThreePointParams(0.5, 0.5))
    assert all(r.passed for r in run_suite(spec))
    assert not all(r.passed for r in run_suite(spec, fault="perturb"))


def test_report_roundtrip():
    rep = VerifyReport("residual[conjugate2]", 1.5e-7, 1e-4, 0.35)
    line = rep.line()
    assert line.split("\t")[1] == "pass"
    back = VerifyReport.from_line(line)
    assert back.property_name == rep.property_name and back.passed
    assert back.worst_location == pytest.approx(0.35)
    two = VerifyReport.from_line(VerifyReport("p", 2.0, 1.0, (0.1, 0.2)).line())
    assert not two.passed and two.worst_location == (0.1, 0.2)
    assert VerifyReport.from_line(VerifyReport("q", 0.0, 0.0).line()).worst_location is None


@given(st.floats(0, 1e3, allow_nan=False), st.floats(0, 1e3))
def test_report_pass_rule(mag, tol):
    assert VerifyReport("p", mag, tol).passed == (mag <= tol)
