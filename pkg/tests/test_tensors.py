import numpy as np
import pytest

from modwave.errors import StepUnderflow
from modwave.models import CoupledNLSModel, NLSParams, ShallowWaterModel, SWParams
from modwave.tensors import analytic_bundle, bundle, bundle_batch, contract2, contract3
from modwave.verify import random_nls_points, random_sw_points

from oracles import nls_tensors, sw_tensors

NAMES12 = ("A", "B", "DkA", "DwA", "DkB", "DwB", "D2kB")


def _oracle(m, pt):
    if isinstance(m, ShallowWaterModel):
        p = m.params
        return sw_tensors(p.g, p.rho1, p.r, pt.k, pt.omega, p.R1, p.R2)
    p = m.params
    return nls_tensors(p.alpha1, p.alpha2, p.beta11, p.beta12, p.beta22, pt.k, pt.omega)


def _rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(2024)
    return random_sw_points(rng, 15) + random_nls_points(rng, 15)


def test_fd_matches_symbolic_oracle(samples):
    for m, pt in samples:
        b, ex = bundle(m, pt, 3), _oracle(m, pt)
        for name in NAMES12:
            assert _rel(getattr(b, name), ex[name]) < 1e-7, name
        assert _rel(b.D3kB, ex["D3kB"]) < 1e-4


def test_analytic_bundle_matches_symbolic_oracle(samples):
    for m, pt in samples:
        a, ex = analytic_bundle(m, pt, 3), _oracle(m, pt)
        for name in NAMES12 + ("D3kB",):
            assert _rel(getattr(a, name), ex[name]) < 1e-12, name


def test_symmetry_defects_recorded(samples):
    for m, pt in samples:
        b = bundle(m, pt, 2)
        assert b.step_report["sym_defect_DkB"] < 1e-7
        assert b.step_report["adjoint_defect"] < 1e-7
        assert np.array_equal(b.DkB, b.DkB.T)


def test_higher_tensors_symmetric(samples):
    for m, pt in samples[::5]:
        b = bundle(m, pt, 3)
        assert np.allclose(b.D2kB, b.D2kB.transpose(0, 2, 1), rtol=1e-9, atol=1e-12)
        for perm in [(0, 2, 1, 3), (0, 3, 2, 1), (0, 1, 3, 2)]:
            assert np.allclose(b.D3kB, b.D3kB.transpose(perm), rtol=1e-5, atol=1e-9)


def test_sw_rest_state_diagonal():
    m = ShallowWaterModel(SWParams(r=0.5))
    b = bundle(m, m.point_from_state([10, 5], [0, 0]), 1)
    assert np.allclose(b.DkB, np.diag([10, 2.5]), atol=1e-9)
    assert np.linalg.det(b.DkB) == pytest.approx(25, rel=1e-9)


def test_sw_fixture_kernel(sw_point, sw_cp):
    m, pt = sw_point
    b = bundle(m, pt, 1)
    z = m.reference_zeta(pt)
    assert np.linalg.norm(b.DkB @ z) < 1e-9 * np.linalg.norm(b.DkB) * np.linalg.norm(z)
    assert np.linalg.norm(b.DkB @ sw_cp.zeta) < 1e-7 * np.linalg.norm(b.DkB)


def test_nls_decoupled_diagonal():
    m = CoupledNLSModel(NLSParams(beta12=0.0))
    b = bundle(m, m.point_from_state([4, 9], [1.2, -0.7]), 1)
    assert abs(b.DkB[0, 1]) < 1e-10 * np.linalg.norm(b.DkB)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_error_estimates_within_target(sw_point, order):
    m, pt = sw_point
    rep = bundle(m, pt, order).step_report
    assert rep["rel_error_first"] <= 1e-7
    if order >= 2:
        assert rep["rel_error_D2kB"] <= 1e-7
    if order == 3:
        assert rep["rel_error_D3kB"] <= 1e-5


def test_bad_order(sw_point):
    with pytest.raises(ValueError):
        bundle(*sw_point, order=4)


class _Noisy(ShallowWaterModel):
    """Conservation laws with O(1e-6) noise: no step can meet the target."""

    def conservation(self, k, omega):
        A, B = super().conservation(k, omega)
        rng = np.random.default_rng()
        return A, B * (1 + 1e-6 * rng.standard_normal(np.shape(B)))


def test_noise_raises_step_underflow():
    m = _Noisy(SWParams(r=0.5))
    with pytest.raises(StepUnderflow):
        bundle(m, m.point_from_state([10, 5], [1.0, 0.5]), 2)


def test_step_shrinks_near_boundary():
    m = ShallowWaterModel(SWParams(r=0.5))
    pt = m.point_from_state([1e-3, 5], [0.3, 0.2])
    b = bundle(m, pt, 1)
    assert max(b.step_report["h0"]) < 0.1
    assert _rel(b.DkB, analytic_bundle(m, pt, 1).DkB) < 1e-7


def test_batch_matches_single(samples):
    m, _ = samples[0]
    pts = [pt for mm, pt in samples[:15]]
    # same model required for a batch: rebuild points on m
    pts = [m.point_from_state(pt.state, pt.k) for pt in pts]
    k = np.array([p.k for p in pts])
    w = np.array([p.omega for p in pts])
    t = bundle_batch(m, k, w, order=2)
    for i, p in enumerate(pts):
        a = analytic_bundle(m, p, 2)
        assert _rel(t["DkB"][i], a.DkB) < 1e-7
        assert _rel(t["D2kB"][i], a.D2kB) < 1e-7


# -- contractions ---------------------------------------------------------------

@pytest.fixture(scope="module")
def tensors():
    rng = np.random.default_rng(5)
    T2 = rng.normal(size=(2, 2, 2))
    T2 = 0.5 * (T2 + T2.transpose(0, 2, 1))
    T3 = rng.normal(size=(2, 2, 2, 2))
    T3 = sum(T3.transpose(p) for p in [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3),
                                      (0, 2, 3, 1), (0, 3, 1, 2), (0, 3, 2, 1)]) / 6
    return T2, T3, rng.normal(size=(3, 2))


def test_contract2_symmetric(tensors):
    T2, _, (u, v, _) = tensors
    assert np.allclose(contract2(T2, u, v), contract2(T2, v, u), rtol=1e-14)


def test_contract2_additive(tensors):
    T2, _, (u, v, w) = tensors
    assert np.max(np.abs(contract2(T2, u + v, w) - contract2(T2, u, w) - contract2(T2, v, w))) < 1e-13


@pytest.mark.parametrize("c", [-2.5, 0.0, 3.0])
def test_contract3_homogeneous(tensors, c):
    _, T3, (u, v, w) = tensors
    assert np.allclose(contract3(T3, c * u, v, w), c * contract3(T3, u, v, w), atol=1e-14)


def test_contract3_basis(tensors):
    _, T3, _ = tensors
    e1 = np.array([1.0, 0.0])
    assert np.array_equal(contract3(T3, e1, e1, e1), T3[:, 0, 0, 0])


def test_contract3_symmetric(tensors):
    _, T3, (u, v, w) = tensors
    ref = contract3(T3, u, v, w)
    for args in [(v, u, w), (w, v, u), (u, w, v)]:
        assert np.allclose(contract3(T3, *args), ref, rtol=1e-13)


def test_directional_consistency(samples):
    for m, pt in samples[::3]:
        b = bundle(m, pt, 2)
        u = np.array([0.6, -0.8])
        h = 1e-4 * max(np.max(np.abs(pt.k)), 1.0)

        def DkB_u(t):
            p = m.point(pt.k + t * u, pt.omega)
            return analytic_bundle(m, p, 1).DkB @ u

        fd = (DkB_u(h) - DkB_u(-h)) / (2 * h)
        assert _rel(contract2(b.D2kB, u, u), fd) < 1e-6
