import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kho.core import (GaussianSpec, KhoParams, QuantumState, check_boundary, default_grid,
                      edge_mass, enlarge, expectations, fidelity, inner_product, kick_reach,
                      make_grid, prepare_gaussian)
from kho.errors import GridMismatchError, GridOverflowError
from kho.presets import PURITY_HBAR, PURITY_K, all_published, picture_state


class TestMakeGrid:
    def test_standard_grid(self):
        g = make_grid(1024, 20.0, 1.0)
        assert g.dq == 0.0390625
        assert g.dp == pytest.approx(2 * math.pi / (1024 * 0.0390625), rel=1e-14)
        assert g.dp == pytest.approx(0.15708, abs=1e-5)

    def test_smallest_grid(self):
        g = make_grid(2, 1.0, 1.0)
        assert g.dq == 1.0
        assert g.dp == pytest.approx(math.pi, rel=1e-14)

    def test_hbar_scales_dp(self):
        g = make_grid(1024, 20.0, 0.9)
        assert g.dp == pytest.approx(0.9 * 2 * math.pi / 40, rel=1e-14)
        assert g.dp == pytest.approx(0.14137, abs=1e-5)

    @pytest.mark.parametrize("n,q,h", [(1024, 20.0, 1.0), (512, 7.5, 0.05), (4096, 33.0, 4.72)])
    def test_fourier_pairing(self, n, q, h):
        g = make_grid(n, q, h)
        assert g.dp * g.dq * g.n_points == pytest.approx(2 * math.pi * h, rel=1e-13)

    def test_symmetric_nodes(self):
        g = make_grid(8, 2.0, 1.0)
        assert g.q[0] == -2.0
        assert g.q[4] == 0.0
        assert np.allclose(g.q[1:], -g.q[1:][::-1])

    @pytest.mark.parametrize("args", [(1, 1.0, 1.0), (16, 0.0, 1.0), (16, 1.0, 0.0), (16, -1.0, 1.0),
                                      (16, 1.0, -0.5), (16.5, 1.0, 1.0)])
    def test_rejects_bad_arguments(self, args):
        with pytest.raises(ValueError):
            make_grid(*args)


class TestKhoParams:
    def test_rejects_nonpositive_hbar(self):
        with pytest.raises(ValueError):
            KhoParams(1.0, 0.5, 0.0, 0.0)

    def test_rejects_negative_kick(self):
        with pytest.raises(ValueError):
            KhoParams(-1.0, 0.5, 0.0, 1.0)

    def test_rejects_nonpositive_squeeze(self):
        with pytest.raises(ValueError):
            GaussianSpec(squeeze=0.0)


@pytest.fixture
def grid1():
    return make_grid(1024, 20.0, 1.0)


class TestPrepareGaussian:
    def test_minimum_uncertainty(self, grid1):
        m = expectations(prepare_gaussian(GaussianSpec(), grid1))
        assert math.sqrt(m.var_q * m.var_p) == pytest.approx(0.5, abs=1e-10)
        assert math.sqrt(m.var_q) == pytest.approx(math.sqrt(0.5), abs=1e-6)
        assert math.sqrt(m.var_p) == pytest.approx(math.sqrt(0.5), abs=1e-6)

    def test_squeezed(self, grid1):
        m = expectations(prepare_gaussian(GaussianSpec(squeeze=2.0), grid1))
        assert math.sqrt(m.var_q) == pytest.approx(2 * math.sqrt(0.5), abs=1e-6)
        assert math.sqrt(m.var_p) == pytest.approx(math.sqrt(0.5) / 2, abs=1e-6)

    def test_displaced(self):
        g = make_grid(1024, 20.0, 0.9)
        m = expectations(prepare_gaussian(GaussianSpec(1.5, -0.5), g))
        assert m.mean_q == pytest.approx(1.5, abs=1e-8)
        assert m.mean_p == pytest.approx(-0.5, abs=1e-8)

    def test_width_at_other_hbar(self):
        g = make_grid(1024, 20.0, 0.42)
        m = expectations(prepare_gaussian(GaussianSpec(), g))
        assert math.sqrt(m.var_q) == pytest.approx(math.sqrt(0.21), abs=1e-6)
        assert math.sqrt(m.var_p) == pytest.approx(math.sqrt(0.21), abs=1e-6)

    def test_tilt_matches_covariance(self, grid1):
        spec = GaussianSpec(0.3, 0.2, 1.7, 0.6)
        state = prepare_gaussian(spec, grid1)
        cov = spec.covariance(1.0)
        psi = state.amplitudes
        p_psi = np.fft.ifft(grid1.p * np.fft.fft(psi))
        # Re<QP> is the symmetrized product
        sym = np.real(np.vdot(psi, grid1.q * p_psi)) * grid1.dq - 0.3 * 0.2
        m = expectations(state)
        assert m.var_q == pytest.approx(cov[0, 0], abs=1e-8)
        assert m.var_p == pytest.approx(cov[1, 1], abs=1e-8)
        assert sym == pytest.approx(cov[0, 1], abs=1e-8)

    def test_normalized(self, grid1):
        assert prepare_gaussian(GaussianSpec(1.0, 2.0, 0.7), grid1).norm() == pytest.approx(1.0, abs=1e-12)

    def test_overflow_when_too_wide(self):
        g = make_grid(256, 3.0, 1.0)
        with pytest.raises(GridOverflowError) as exc:
            prepare_gaussian(GaussianSpec(squeeze=3.0), g)
        assert exc.value.axis == "position"
        assert "prepare_gaussian" in str(exc.value)

    def test_overflow_in_momentum(self):
        g = make_grid(64, 20.0, 1.0)  # p_max = 1.6
        with pytest.raises(GridOverflowError) as exc:
            prepare_gaussian(GaussianSpec(squeeze=0.5), g)
        assert exc.value.axis == "momentum"

    def test_hbar_mismatch(self, grid1):
        with pytest.raises(GridMismatchError):
            prepare_gaussian(GaussianSpec(), grid1, hbar=0.5)


class TestInnerProduct:
    def test_self_overlap(self, grid1):
        psi = prepare_gaussian(GaussianSpec(0.5, 1.0, 1.3, 0.2), grid1)
        assert inner_product(psi, psi) == pytest.approx(1.0, abs=1e-12)

    def test_distant_packets_nearly_orthogonal(self, grid1):
        a = prepare_gaussian(GaussianSpec(-5.0, 0.0, 0.5), grid1)
        b = prepare_gaussian(GaussianSpec(5.0, 0.0, 0.5), grid1)
        # closed form exp(-100)
        assert abs(inner_product(a, b)) < 1e-40

    @pytest.mark.parametrize("hbar", [0.42, 0.9, 1.0, 4.72])
    @pytest.mark.parametrize("d", [0.5, 1.0, 3.0])
    def test_closed_form_overlap(self, hbar, d):
        g = make_grid(2048, 25.0, hbar)
        a = prepare_gaussian(GaussianSpec(0.0, 0.0), g)
        b = prepare_gaussian(GaussianSpec(d, 0.0), g)
        assert fidelity(a, b) == pytest.approx(math.exp(-d * d / (4 * hbar)), abs=1e-12)

    def test_grid_mismatch(self, grid1):
        a = prepare_gaussian(GaussianSpec(), grid1)
        b = prepare_gaussian(GaussianSpec(), make_grid(2048, 20.0, 1.0))
        with pytest.raises(GridMismatchError):
            inner_product(a, b)

    def test_conjugate_linear_in_first_argument(self, grid1):
        a = prepare_gaussian(GaussianSpec(0.5, 0.0), grid1)
        b = prepare_gaussian(GaussianSpec(0.0, 0.3), grid1)
        scaled = a.with_amplitudes(1j * a.amplitudes)
        assert inner_product(scaled, b) == pytest.approx(-1j * inner_product(a, b), abs=1e-14)


class TestExpectations:
    def test_vacuum_energy(self, grid1):
        assert expectations(prepare_gaussian(GaussianSpec(), grid1)).energy == pytest.approx(0.5, abs=1e-10)

    def test_displaced_energy(self, grid1):
        assert expectations(prepare_gaussian(GaussianSpec(2.0, 0.0), grid1)).energy == pytest.approx(2.5, abs=1e-10)

    def test_squeezed_energy(self, grid1):
        e = expectations(prepare_gaussian(GaussianSpec(squeeze=2.0), grid1)).energy
        assert e == pytest.approx((4 * 0.5 + 0.5 / 4) / 2, abs=1e-10)
        assert e == pytest.approx(1.0625, abs=1e-10)

    def test_rejects_unnormalized(self, grid1):
        psi = prepare_gaussian(GaussianSpec(), grid1)
        with pytest.raises(ValueError):
            expectations(psi.with_amplitudes(2 * psi.amplitudes))


def test_parseval(grid1):
    psi = prepare_gaussian(GaussianSpec(1.0, -2.0, 1.4, 0.3), grid1)
    pos = np.sum(np.abs(psi.amplitudes) ** 2) * grid1.dq
    mom = np.sum(np.abs(psi.momentum_amplitudes()) ** 2) * grid1.dp
    assert mom == pytest.approx(pos, abs=1e-12)


def test_state_is_immutable(grid1):
    psi = prepare_gaussian(GaussianSpec(), grid1)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 1.0


def test_state_shape_checked(grid1):
    with pytest.raises(ValueError):
        QuantumState(np.zeros(10), grid1)


@settings(max_examples=30, deadline=None)
@given(q0=st.floats(-3, 3), p0=st.floats(-3, 3), s=st.floats(0.5, 2.0),
       tilt=st.floats(-math.pi, math.pi), hbar=st.floats(0.2, 2.0))
def test_preparation_recovers_spec(q0, p0, s, tilt, hbar):
    spec = GaussianSpec(q0, p0, s, tilt)
    g = default_grid(spec, hbar)
    m = expectations(prepare_gaussian(spec, g))
    cov = spec.covariance(hbar)
    assert m.mean_q == pytest.approx(q0, abs=1e-6)
    assert m.mean_p == pytest.approx(p0, abs=1e-6)
    assert m.var_q == pytest.approx(cov[0, 0], abs=1e-6)
    assert m.var_p == pytest.approx(cov[1, 1], abs=1e-6)


@pytest.mark.parametrize("name,params", sorted(all_published().items()))
@pytest.mark.parametrize("squeeze", [1.0, 2.0])
def test_default_grid_holds_published_states(name, params, squeeze):
    spec = GaussianSpec(squeeze=squeeze)
    g = default_grid(spec, params.hbar, params.K, 3)
    check_boundary(prepare_gaussian(spec, g))


@pytest.mark.parametrize("hbar", PURITY_HBAR)
@pytest.mark.parametrize("K", PURITY_K)
def test_default_grid_holds_purity_states(K, hbar):
    spec = GaussianSpec()
    g = default_grid(spec, hbar, K, 3)
    assert g.n_points >= 1024
    check_boundary(prepare_gaussian(spec, g))


def test_picture_state_fits():
    params = all_published()["weak_chaos"]
    g = default_grid(picture_state(), params.hbar, params.K, 3)
    assert max(edge_mass(prepare_gaussian(picture_state(), g))) < 1e-10


class TestGridSizing:
    def test_kick_reach_classical_limit(self):
        # small hbar: the quantum reach approaches K
        assert 2.0 < kick_reach(2.0, 0.01) < 2.5

    def test_kick_reach_exceeds_K_for_large_hbar(self):
        assert kick_reach(7.4, 4.72) > 7.4

    def test_kick_reach_zero(self):
        assert kick_reach(0.0, 1.0) == 0.0

    def test_enlarge_position_keeps_spacing(self, grid1):
        g = enlarge(grid1, "position")
        assert g.dq == grid1.dq and g.q_max == 2 * grid1.q_max

    def test_enlarge_momentum_keeps_extent(self, grid1):
        g = enlarge(grid1, "momentum")
        assert g.q_max == grid1.q_max and g.p_max == 2 * grid1.p_max
