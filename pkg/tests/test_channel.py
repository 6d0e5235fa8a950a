import math

import numpy as np
import pytest

from risdc import (
    ArrayGeometry,
    ChannelConfig,
    ConfigurationError,
    DomainError,
    PathComponent,
    draw_link,
    link_stream,
    steering_vector,
    synthesize_channel,
    ula,
    upa,
)


def test_steering_broadside_ula4():
    v = steering_vector(ula(4), 0.0, 0.0)
    np.testing.assert_allclose(v, np.ones(4), atol=1e-15)


def test_steering_endfire_ula2():
    v = steering_vector(ula(2), math.pi / 2, 0.0)
    np.testing.assert_allclose(v, [1.0, -1.0], atol=1e-12)


def test_steering_upa_matches_scalar_formula():
    # oracle: direct per-element evaluation of the phase formula
    geom = upa(2, 2)
    az, el = math.pi / 6, math.pi / 9
    expected = []
    for ix in range(2):
        for iy in range(2):
            phase = 2 * math.pi * 0.5 * (ix * math.sin(az) * math.cos(el) + iy * math.sin(el))
            expected.append(complex(math.cos(phase), math.sin(phase)))
    np.testing.assert_allclose(steering_vector(geom, az, el), expected, atol=1e-14)


def test_steering_unit_modulus_and_norm():
    rng = np.random.default_rng(7)
    geom = upa(5, 3)
    for _ in range(20):
        az = rng.uniform(-math.pi, math.pi)
        el = rng.uniform(-math.pi / 2, math.pi / 2)
        v = steering_vector(geom, az, el)
        assert np.max(np.abs(np.abs(v) - 1.0)) < 1e-12
        assert abs(np.linalg.norm(v) - math.sqrt(geom.n)) < 1e-12


def test_steering_rejects_out_of_range_angles():
    with pytest.raises(DomainError):
        steering_vector(ula(4), 4.0, 0.0)
    with pytest.raises(DomainError):
        steering_vector(ula(4), 0.0, 2.0)


def test_geometry_validation():
    with pytest.raises(ConfigurationError):
        ArrayGeometry("ULA", 4, 2)
    with pytest.raises(ConfigurationError):
        ArrayGeometry("UPA", 0, 2)
    with pytest.raises(ConfigurationError):
        ArrayGeometry("UPA", 2, 2, spacing=0.0)
    with pytest.raises(ConfigurationError):
        ArrayGeometry("circular", 4)


def test_synthesize_single_element_single_path():
    p = PathComponent(1.0, 0.0, 0.0, 0.0, 0.0)
    np.testing.assert_allclose(synthesize_channel(ula(1), ula(1), [p]), [[1.0]])


def test_synthesize_broadside_all_ones():
    p = PathComponent(1.0, 0.0, 0.0, 0.0, 0.0)
    np.testing.assert_allclose(synthesize_channel(ula(2), ula(2), [p]), np.ones((2, 2)))


def test_synthesize_shape_and_rank():
    rng = np.random.default_rng(3)
    paths = [
        PathComponent(
            complex(rng.standard_normal(), rng.standard_normal()),
            rng.uniform(-math.pi, math.pi),
            rng.uniform(-math.pi / 2, math.pi / 2),
            rng.uniform(-math.pi, math.pi),
            rng.uniform(-math.pi / 2, math.pi / 2),
        )
        for _ in range(2)
    ]
    m = synthesize_channel(ula(4), ula(8), paths)
    assert m.shape == (8, 4)
    s = np.linalg.svd(m, compute_uv=False)
    # second singular value nonzero (two distinct paths), rest below rank threshold
    assert s[1] > 1e-9 * s[0]
    assert np.all(s[2:] <= 1e-9 * s[0])


def test_synthesize_rejects_empty_paths():
    with pytest.raises(DomainError):
        synthesize_channel(ula(2), ula(2), [])


def _cfg():
    return ChannelConfig(carrier_hz=28e9)


def test_draw_link_deterministic():
    a = draw_link(_cfg(), upa(8, 4), ula(100), [ula(4)], 1234, 0)
    b = draw_link(_cfg(), upa(8, 4), ula(100), [ula(4)], 1234, 0)
    assert np.array_equal(a.g, b.g)
    assert all(np.array_equal(x, y) for x, y in zip(a.h_per_ue, b.h_per_ue))
    assert a.seed_record == b.seed_record


def test_draw_link_trials_differ():
    a = draw_link(_cfg(), upa(8, 4), ula(50), [ula(4)], 1234, 0)
    b = draw_link(_cfg(), upa(8, 4), ula(50), [ula(4)], 1234, 1)
    assert not np.array_equal(a.g, b.g)


def test_draw_link_shapes():
    lk = draw_link(_cfg(), upa(8, 4), ula(100), [ula(4)], 9, 0)
    assert lk.g.shape == (100, 32)
    assert lk.h_per_ue[0].shape == (100, 4)


def test_draw_link_link_base_separates_streams():
    a = draw_link(_cfg(), ula(4), ula(16), [ula(2)], 5, 0)
    b = draw_link(_cfg(), ula(4), ula(16), [ula(2)], 5, 0, link_base=8)
    assert not np.array_equal(a.g, b.g)


def test_stream_separation_first_1000_variates():
    streams = {
        (t, lid): link_stream(77, t, lid).uniform(size=1000)
        for t in (0, 1)
        for lid in (0, 1, 2)
    }
    keys = list(streams)
    for i, ka in enumerate(keys):
        for kb in keys[i + 1 :]:
            assert not np.array_equal(streams[ka], streams[kb])


def test_channel_config_validation():
    with pytest.raises(ConfigurationError):
        ChannelConfig(carrier_hz=0.0)
    with pytest.raises(ConfigurationError):
        ChannelConfig(carrier_hz=1e9, num_paths=0, los_only=False)
    with pytest.raises(ConfigurationError):
        ChannelConfig(carrier_hz=1e9, num_paths=3, los_only=True)


def test_nlos_paths_change_rank():
    cfg = ChannelConfig(carrier_hz=28e9, num_paths=3, los_only=False)
    lk = draw_link(cfg, ula(8), ula(32), [ula(2)], 11, 0)
    s = np.linalg.svd(lk.g, compute_uv=False)
    assert s[2] > 1e-9 * s[0]
    assert np.all(s[3:] <= 1e-9 * s[0])
