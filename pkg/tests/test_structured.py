import numpy as np
import pytest
from hypothesis import given

from hetnet.analyzers import Verdict, check_theorem1
from hetnet.model import InvalidSpecError, build_lifted
from hetnet.numerics import eigen_left, pbh_controllable
from hetnet.structured import (
    as_network_spec,
    build_structured_lifted,
    check_corollary3,
    check_diagonalizable,
    check_theorem5,
    diagonalizable,
    eta_numerator,
    gamma_numerator,
    make_structured,
    shift_matrix,
    unit_input,
    validate_structured,
)
from oracles import exact_controllable
from strategies import diagonalizable_specs, seeds, structured_specs

C = Verdict.CONTROLLABLE


def _chain(N=3, n=2, delta=(1, 0, 0)):
    W = np.eye(N, k=-1)
    H = unit_input(n).ravel()
    Cr = np.zeros(n)
    Cr[0] = 1.0
    return make_structured([np.zeros(n)] * N, W, H, Cr, list(delta))


def test_companion_closed_loop_is_shift():
    spec = _chain()
    for node in spec.nodes:
        np.testing.assert_array_equal(node.closed_loop(), shift_matrix(2))


def test_validation():
    bad = make_structured([np.zeros(2)] * 2, np.eye(2), np.ones(2), np.ones(2), [1, 0])
    assert any(v.field == "W" for v in validate_structured(bad))
    with pytest.raises(InvalidSpecError):
        build_structured_lifted(bad)


def test_chain_driven_at_root():
    assert check_theorem5(_chain()).verdict is C
    assert check_corollary3(_chain()).verdict is C
    assert check_theorem5(_chain(delta=(0, 1, 0))).verdict is Verdict.UNCONTROLLABLE


def test_all_driven_is_not_applicable():
    assert check_theorem5(_chain(delta=(1, 1, 1))).verdict is Verdict.NOT_APPLICABLE
    assert check_corollary3(_chain(delta=(1, 1, 1))).verdict is Verdict.NOT_APPLICABLE


def test_diagonalizable_detects_jordan_block():
    assert diagonalizable(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not diagonalizable(np.array([[0.0, 0.0], [1.0, 0.0]]))


@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_shift_spectrum(n):
    (cl,) = eigen_left(shift_matrix(n))
    assert abs(cl.value) < 1e-8
    assert cl.algebraic_multiplicity == n and cl.geometric_multiplicity == 1


@given(seeds)
def test_transfer_numerators_are_polynomials(s):
    rng = np.random.default_rng(s)
    n = int(rng.integers(1, 6))
    H = rng.integers(-3, 4, n).astype(float)
    Cr = rng.integers(-3, 4, n).astype(float)
    S = shift_matrix(n)
    for z in (0.7, -1.3, 2.0 + 0.5j):
        R = np.linalg.solve(z * np.eye(n) - S, np.eye(n))
        q = z**n * (Cr @ R @ H)
        r = z**n * (Cr @ R @ unit_input(n).ravel())
        assert np.polyval(gamma_numerator(H, Cr), z) == pytest.approx(q, abs=1e-9)
        assert np.polyval(eta_numerator(Cr), z) == pytest.approx(r, abs=1e-9)


@given(structured_specs)
def test_general_view_lifts_identically(spec):
    a = build_structured_lifted(spec)
    b = build_lifted(as_network_spec(spec))
    np.testing.assert_array_equal(a.Phi, b.Phi)
    np.testing.assert_array_equal(a.Psi, b.Psi)


@given(structured_specs)
def test_theorem5_equals_lifted_pbh(spec):
    L = build_structured_lifted(spec)
    v = check_theorem5(spec).verdict
    assert (v is C) == pbh_controllable(L.Phi, L.Psi)[0] == exact_controllable(L.Phi, L.Psi)
    assert (v is C) == (check_theorem1(as_network_spec(spec)).verdict is C)


@given(structured_specs)
def test_corollary3_is_sufficient(spec):
    if check_corollary3(spec).verdict is C:
        assert check_theorem5(spec).verdict is C


@given(diagonalizable_specs)
def test_diagonalizable_equals_lifted_pbh(spec):
    L = build_structured_lifted(spec)
    v = check_diagonalizable(spec).verdict
    assert v is not Verdict.NOT_APPLICABLE
    assert (v is C) == exact_controllable(L.Phi, L.Psi)
