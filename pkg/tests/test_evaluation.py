import math

import numpy as np
import pytest

from risdc import (
    DomainError,
    LinkBudget,
    RegulationMatrix,
    achievable_rate,
    decoupled_rate_closed_form,
    design_precoder,
    draw_link,
    ChannelConfig,
    effective_channel,
    haar_random_unitary,
    mirror_identity,
    multiuser_sum_rate,
    random_phase_diag,
    svd_decouple,
    thin_decouple,
    ula,
)


def _rand_channels(rng, n, m, k):
    g = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    h = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    return g, h


# ---------------------------------------------------------------------------
# effective_channel


def test_effective_identity_regulation_identity_g():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    eff = effective_channel(h, mirror_identity(5), np.eye(5))
    np.testing.assert_allclose(eff, h.conj().T)


def test_effective_zero_g():
    h = np.ones((4, 2), dtype=np.complex128)
    eff = effective_channel(h, mirror_identity(4), np.zeros((4, 3)))
    np.testing.assert_allclose(eff, np.zeros((2, 3)))


def test_effective_thin_vs_full_agree():
    rng = np.random.default_rng(1)
    g, h = _rand_channels(rng, 32, 8, 2)
    eff_full = effective_channel(h, svd_decouple(g, h).theta, g)
    eff_thin = effective_channel(h, thin_decouple(g, h).theta, g)
    assert np.linalg.norm(eff_full - eff_thin) < 1e-10


def test_effective_dimension_mismatch():
    with pytest.raises(DomainError):
        effective_channel(np.ones((4, 1)), mirror_identity(5), np.ones((5, 2)))


# ---------------------------------------------------------------------------
# design_precoder


def test_precoder_dominant_axis():
    f = design_precoder(np.diag([2.0, 1.0]).astype(complex), 1)
    np.testing.assert_allclose(np.abs(f.f.ravel()), [1.0, 0.0], atol=1e-12)


def test_precoder_uniform_split():
    f = design_precoder(np.diag([2.0, 1.0]).astype(complex), 2)
    np.testing.assert_allclose(np.abs(f.f), np.eye(2) / math.sqrt(2), atol=1e-12)
    assert abs(np.linalg.norm(f.f) - 1.0) < 1e-12


def test_precoder_orthogonal_streams():
    rng = np.random.default_rng(2)
    h = rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
    f = design_precoder(h, 2)
    hf = h @ f.f
    off = hf.conj().T @ hf
    assert abs(off[0, 1]) < 1e-10


def test_precoder_errors():
    with pytest.raises(DomainError):
        design_precoder(np.zeros((2, 2), dtype=complex), 1)
    with pytest.raises(DomainError):
        design_precoder(np.ones((2, 2), dtype=complex), 3)


# ---------------------------------------------------------------------------
# achievable_rate


def test_rate_zero_channel():
    f = design_precoder(np.ones((1, 1), dtype=complex), 1)
    assert achievable_rate(np.zeros((1, 1)), f, LinkBudget()) == 0.0


def test_rate_scalar_substitution():
    # K = M = 1, h = 1, rho/sigma^2 = 10, N = 1: log2(11)
    f = design_precoder(np.ones((1, 1), dtype=complex), 1)
    rate = achievable_rate(np.ones((1, 1)), f, LinkBudget(element_scaling=1))
    assert abs(rate - math.log2(11.0)) < 1e-12


def test_rate_two_stream_diagonal_oracle():
    a, b = 1.7, 0.4
    h = np.diag([a, b]).astype(complex)
    budget = LinkBudget(tx_power=4.0, noise_var=0.5, element_scaling=8)
    f = design_precoder(h, 2)
    c = budget.gain_scale
    # oracle: direct 2x2 determinant expansion
    expected = math.log2((1 + c * a * a / 2) * (1 + c * b * b / 2))
    assert abs(achievable_rate(h, f, budget) - expected) < 1e-12


def test_rate_monotone_in_power():
    rng = np.random.default_rng(3)
    h = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    f = design_precoder(h, 2)
    rates = [
        achievable_rate(h, f, LinkBudget(tx_power=p, element_scaling=4))
        for p in (0.1, 1.0, 5.0, 20.0, 100.0)
    ]
    assert all(r2 > r1 for r1, r2 in zip(rates, rates[1:]))
    assert all(r >= 0 for r in rates)


def test_rate_global_phase_invariance():
    rng = np.random.default_rng(4)
    h = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    f = design_precoder(h, 1)
    budget = LinkBudget(element_scaling=4)
    r1 = achievable_rate(h, f, budget)
    r2 = achievable_rate(np.exp(1j * 0.77) * h, f, budget)
    assert abs(r1 - r2) < 1e-12


# ---------------------------------------------------------------------------
# decoupled_rate_closed_form


def test_closed_form_trivial_values():
    class SV:
        def __init__(self, s):
            self.s = np.asarray(s)

    budget = LinkBudget(tx_power=10.0, element_scaling=1)
    assert abs(decoupled_rate_closed_form(SV([1.0]), SV([1.0]), budget, 1) - math.log2(11)) < 1e-12
    # zero second singular value contributes log2(1 + 0) = 0
    two = decoupled_rate_closed_form(SV([2.0, 1.0]), SV([1.0, 0.0]), budget, 2)
    one = math.log2(1 + budget.gain_scale / 2 * 4.0)
    assert abs(two - one) < 1e-12
    with pytest.raises(DomainError):
        decoupled_rate_closed_form(SV([1.0]), SV([1.0]), budget, 2)


def test_closed_form_matches_assembled_channel():
    rng = np.random.default_rng(5)
    g, h = _rand_channels(rng, 32, 8, 2)
    sol = thin_decouple(g, h)
    budget = LinkBudget(element_scaling=32)
    for streams in (1, 2):
        closed = decoupled_rate_closed_form(sol.svd_g, sol.svd_h, budget, streams)
        eff = effective_channel(h, sol.theta, g)
        assembled = achievable_rate(eff, design_precoder(eff, streams), budget)
        assert abs(closed - assembled) < 1e-9 * assembled


def test_k1_decoupling_upper_bounds_any_passive_regulation():
    rng = np.random.default_rng(6)
    g, h = _rand_channels(rng, 16, 4, 1)
    sol = thin_decouple(g, h)
    budget = LinkBudget(element_scaling=16)
    best = decoupled_rate_closed_form(sol.svd_g, sol.svd_h, budget, 1)
    for i in range(20):
        theta = (
            random_phase_diag(16, np.random.default_rng(100 + i))
            if i % 2
            else haar_random_unitary(16, np.random.default_rng(200 + i))
        )
        eff = effective_channel(h, theta, g)
        rate = achievable_rate(eff, design_precoder(eff, 1), budget)
        assert rate <= best * (1 + 1e-9)


# ---------------------------------------------------------------------------
# multiuser_sum_rate


def test_multiuser_single_ue_reduces_to_single_user_rate():
    cfg = ChannelConfig(carrier_hz=5e9)
    lk = draw_link(cfg, ula(8), ula(32), [ula(2)], 7, 0)
    theta = thin_decouple(lk.g, lk.h_per_ue[0]).theta
    budget = LinkBudget(element_scaling=32)
    rates, total = multiuser_sum_rate(lk, theta, budget, [budget.tx_power])
    eff = effective_channel(lk.h_per_ue[0], theta, lk.g)
    expected = achievable_rate(eff, design_precoder(eff, 1), budget)
    assert abs(total - expected) < 1e-12
    assert rates == [total]


def test_multiuser_zero_channel_ue_contributes_zero():
    rng = np.random.default_rng(8)
    g, h = _rand_channels(rng, 16, 4, 2)
    class FakeLink:
        def __init__(self, g, h):
            self.g, self.h_per_ue = g, (h,)
    links = [FakeLink(g, h), FakeLink(g, np.zeros_like(h))]
    theta = mirror_identity(16)
    rates, total = multiuser_sum_rate(links, theta, LinkBudget(element_scaling=16))
    assert rates[1] == 0.0
    assert abs(total - rates[0]) < 1e-15


def test_multiuser_symmetry_for_identical_ues():
    cfg = ChannelConfig(carrier_hz=5e9)
    lk = draw_link(cfg, ula(8), ula(32), [ula(2)], 9, 0)
    links = [lk, lk]
    theta = thin_decouple(lk.g, lk.h_per_ue[0]).theta
    rates, _ = multiuser_sum_rate(links, theta, LinkBudget(element_scaling=32))
    assert abs(rates[0] - rates[1]) < 1e-12


def test_multiuser_power_violation_rejected():
    cfg = ChannelConfig(carrier_hz=5e9)
    lk = draw_link(cfg, ula(4), ula(8), [ula(1)], 1, 0)
    with pytest.raises(DomainError):
        multiuser_sum_rate(lk, mirror_identity(8), LinkBudget(), [11.0])
