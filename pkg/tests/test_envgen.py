import json
import math

import numpy as np
import pytest

from rfocus.envgen import (
    SPEED_OF_LIGHT,
    GeometricScene,
    GratingLobeWarning,
    IidEnvSpec,
    add_adjacent_interactions,
    element_path_lengths,
    gen_geometric,
    gen_iid,
    scene_at_frequencies,
    scene_from_json,
    scene_to_json,
)
from rfocus.errors import GeometryError, RfocusError


class TestIidGeneration:
    def test_deterministic(self):
        spec = IidEnvSpec(16, 0.5, 1.5, seed=3)
        a, b = gen_iid(spec), gen_iid(spec)
        assert a.h_z == b.h_z
        assert np.array_equal(a.h, b.h)

    def test_seed_changes_environment(self):
        a = gen_iid(IidEnvSpec(16, 0.5, seed=1))
        b = gen_iid(IidEnvSpec(16, 0.5, seed=2))
        assert not np.array_equal(a.h, b.h)

    def test_baseline_magnitude(self):
        env = gen_iid(IidEnvSpec(4, 1.0, 2.5, seed=0))
        assert abs(env.h_z) == pytest.approx(2.5, rel=1e-12)

    def test_folded_gaussian_magnitude_mean(self):
        # E|N(0, sigma)| = sigma * sqrt(2/pi) ~= 0.7979 * sigma
        env = gen_iid(IidEnvSpec(10_000, 1.0, seed=12))
        assert np.abs(env.h).mean() == pytest.approx(0.7978845608028654, rel=0.02)

    def test_zero_sigma_gives_zero_elements(self):
        env = gen_iid(IidEnvSpec(8, 0.0, seed=0))
        assert np.all(env.h == 0)

    def test_validation(self):
        with pytest.raises(RfocusError):
            IidEnvSpec(0, 1.0)
        with pytest.raises(RfocusError):
            IidEnvSpec(4, -0.1)
        with pytest.raises(RfocusError):
            IidEnvSpec(4, 1.0, -1.0)


class TestAdjacentInteractions:
    def test_pairs_and_magnitudes(self):
        env = gen_iid(IidEnvSpec(6, 1.0, seed=4))
        out = add_adjacent_interactions(env, 0.3, seed=9)
        assert set(out.interactions) == {(i, i + 1) for i in range(5)}
        mags = np.abs(env.h)
        for (i, j), g in out.interactions.items():
            assert abs(g) == pytest.approx(0.3 * math.sqrt(mags[i] * mags[j]),
                                           rel=1e-12)

    def test_deterministic(self):
        env = gen_iid(IidEnvSpec(5, 1.0, seed=4))
        a = add_adjacent_interactions(env, 0.2, seed=1)
        b = add_adjacent_interactions(env, 0.2, seed=1)
        assert a.interactions == b.interactions


def _line_scene(**overrides):
    defaults = dict(wavelength=2.0, rows=1, cols=3, row_spacing=1.0,
                    col_spacing=1.0, tx=(0.0, 0.0, 3.0), rx=(0.0, 0.0, 4.0))
    defaults.update(overrides)
    return GeometricScene(**defaults)


class TestGeometricScene:
    def test_positions_centered_row_major(self):
        scene = GeometricScene(wavelength=2.0, rows=2, cols=3, row_spacing=0.5,
                               col_spacing=1.0, tx=(0, 0, 1), rx=(5, 0, 1))
        pos = scene.element_positions
        assert pos.shape == (6, 3)
        assert np.allclose(pos.mean(axis=0), [0, 0, 0])
        # element 0 at minimum x and y; x varies fastest
        assert np.allclose(pos[0], [-1.0, -0.25, 0.0])
        assert np.allclose(pos[1], [0.0, -0.25, 0.0])
        assert np.allclose(pos[3], [-1.0, 0.25, 0.0])

    def test_surface_area(self):
        scene = GeometricScene(wavelength=2.0, rows=2, cols=4, row_spacing=0.5,
                               col_spacing=0.25, tx=(0, 0, 1), rx=(5, 0, 1))
        assert scene.surface_area == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(GeometryError):
            _line_scene(wavelength=-1.0)
        with pytest.raises(GeometryError):
            _line_scene(rows=0)
        with pytest.raises(GeometryError):
            _line_scene(row_spacing=0.0)
        with pytest.raises(GeometryError):
            _line_scene(element_reflectivity=1.5)
        with pytest.raises(GeometryError):
            _line_scene(tx=(1, 1, 1), rx=(1, 1, 1))
        with pytest.raises(GeometryError):
            # tx exactly on the center element
            _line_scene(tx=(0.0, 0.0, 0.0))


class TestGenGeometric:
    def test_single_element_hand_values(self):
        # lambda = 2 m: element at origin, tx 3 m and rx 4 m away on-axis.
        # Path 3+4 = 7 m = 3.5 wavelengths -> phase exp(-7j*pi) = -1,
        # amplitude 1/(3*4); direct path 1 m = half a wavelength -> -gain.
        scene = GeometricScene(wavelength=2.0, rows=1, cols=1, row_spacing=1.0,
                               col_spacing=1.0, tx=(0, 0, 3.0), rx=(0, 0, 4.0),
                               direct_path_gain=0.5)
        env = gen_geometric(scene, SPEED_OF_LIGHT / 2.0)
        assert env.h[0] == pytest.approx(-1.0 / 12.0, rel=1e-9)
        assert env.h_z == pytest.approx(-0.5, rel=1e-9)

    def test_extra_paths_added_to_baseline(self):
        scene = GeometricScene(wavelength=2.0, rows=1, cols=1, row_spacing=1.0,
                               col_spacing=1.0, tx=(0, 0, 3.0), rx=(0, 0, 4.0),
                               direct_path_gain=0.5, extra_paths=((2.0, 1.0),))
        env = gen_geometric(scene, SPEED_OF_LIGHT / 2.0)
        # extra path: one full wavelength -> +gain/length = +0.5
        assert env.h_z == pytest.approx(-0.5 + 0.5, abs=1e-9)

    def test_grating_lobe_warning(self):
        scene = _line_scene(col_spacing=1.5)
        with pytest.warns(GratingLobeWarning):
            gen_geometric(scene, SPEED_OF_LIGHT / 2.0)

    def test_invalid_frequency(self):
        with pytest.raises(GeometryError):
            gen_geometric(_line_scene(), -1.0)

    def test_path_lengths(self):
        scene = _line_scene()
        lengths = element_path_lengths(scene)
        pos = scene.element_positions
        for k in range(3):
            d1 = np.linalg.norm(pos[k] - np.array([0, 0, 3.0]))
            d2 = np.linalg.norm(pos[k] - np.array([0, 0, 4.0]))
            assert lengths[k] == pytest.approx(d1 + d2, rel=1e-12)

    def test_scene_at_frequencies(self):
        scene = _line_scene()
        freqs = [SPEED_OF_LIGHT / 2.0, SPEED_OF_LIGHT / 1.9]
        envs = scene_at_frequencies(scene, freqs)
        assert len(envs) == 2
        single = gen_geometric(scene, freqs[1])
        assert np.array_equal(envs[1].h, single.h)


class TestSceneSerialization:
    def test_roundtrip(self):
        scene = GeometricScene(wavelength=0.125, rows=2, cols=5,
                               row_spacing=0.06, col_spacing=0.0625,
                               tx=(0.1, -0.2, 1.0), rx=(2.0, 0.5, 0.3),
                               element_reflectivity=0.8, direct_path_gain=1.5,
                               extra_paths=((3.0, 0.25),),
                               noise_floor_power=2.0)
        back = scene_from_json(scene_to_json(scene))
        assert back == scene

    def test_json_units_named(self):
        obj = json.loads(scene_to_json(_line_scene()))
        assert "wavelength_m" in obj
        assert "row_spacing_m" in obj["grid"]
        assert obj["tx_m"] == [0.0, 0.0, 3.0]
