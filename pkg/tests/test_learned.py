"""Observation building, sequence stacking, transformer inference, the
weights file format, and the override rule."""

import math

import numpy as np
import pytest

from fieldnav.forces import ForceSet
from fieldnav.geometry import Scan
from fieldnav.learned import (
    OBS_EXTRA,
    EpisodeBuffer,
    ViTConfig,
    WeightsBundle,
    WeightsError,
    apply_mode_override,
    build_observation,
    load_weights,
    ls_override,
    save_weights,
    stack,
    tensor_shapes,
    vit_forward,
)
from fieldnav.robot import RobotState
from fieldnav.switching import HitPoint, LeavePoint, RSParams, SwitchMemory

TINY = ViTConfig(encoder_layers=2, embed_dim=32, mlp_dim=48, heads=4, t_seq=6)
PARAMS = RSParams.defaults(100, 10.0)


def scan_of(m, fill=10.0):
    return Scan(ranges=np.full(m, fill), max_range=10.0)


def force_zero():
    z = np.zeros(2)
    return ForceSet(f_att=z, f_att_rot=z, f_rep=z, f_tot=np.array([3.0, 0.0]), u_att=0.0, u_rep=0.0)


class TestObservation:
    @pytest.mark.parametrize("m", [16, 100])
    def test_length_is_m_plus_17(self, m):
        mem = SwitchMemory.initial(RobotState(0, 0, 0))
        obs = build_observation(
            scan_of(m), np.array([3.0, 4.0]), RobotState(0, 0, 0), np.array([3.0, 4.0]),
            mem, force_zero(), 0.0,
        )
        assert obs.shape == (m + 17,)

    def test_defaults_before_first_hp(self):
        m = 16
        mem = SwitchMemory.initial(RobotState(0, 0, 0))
        g = np.array([3.0, 4.0])
        obs = build_observation(scan_of(m), g, RobotState(0, 0, 0), g, mem, force_zero(), 0.0)
        np.testing.assert_array_equal(obs[m + 4 : m + 6], g)  # hp slot = current rel goal
        np.testing.assert_array_equal(obs[m + 6 : m + 8], g)  # lp slot = current rel goal
        assert obs[m + 11] == 0.0  # theta at hp
        assert obs[m + 12] == 0.0  # theta at lp
        assert obs[m + 15] == 1.0  # default direction at hp
        assert obs[m + 16] == 0.0  # APF mode

    def test_mode_flag_tracks_theta(self):
        m = 16
        mem = SwitchMemory.initial(RobotState(0, 0, 0))
        g = np.array([1.0, 0.0])
        obs = build_observation(scan_of(m), g, RobotState(0, 0, 0), g, mem, force_zero(), 0.3)
        assert obs[m + 16] == 1.0
        assert obs[m + 9] == pytest.approx(0.3)

    def test_hp_lp_slots_use_recorded_states(self):
        m = 16
        goal = np.array([5.0, 0.0])
        hp_state = RobotState(1.0, 0.0, 0.0)
        lp_state = RobotState(2.0, 0.0, math.pi / 2)
        mem = SwitchMemory(
            state_now=RobotState(3.0, 0.0, 0.0), state_prev=RobotState(2.5, 0.0, 0.0),
            theta_rot=0.1, i_dir=-1,
            hp_now=HitPoint(hp_state, 4.0, -1, 0.0628, 3),
            lp_now=LeavePoint(lp_state, 0.0, 7),
        )
        g = np.array([2.0, 0.0])
        obs = build_observation(scan_of(m), g, RobotState(3.0, 0.0, 0.0), goal, mem, force_zero(), 0.1)
        # memory is pre-commit, so its state_now/theta_rot are the step t-1 values
        np.testing.assert_allclose(obs[m + 2 : m + 4], [2.0, 0.0], atol=1e-12)  # prev
        np.testing.assert_allclose(obs[m + 4 : m + 6], [4.0, 0.0], atol=1e-12)  # hp
        np.testing.assert_allclose(obs[m + 6 : m + 8], [0.0, -3.0], atol=1e-12)  # lp, rotated frame
        assert obs[m + 10] == pytest.approx(0.1)  # theta prev from memory
        assert obs[m + 15] == -1.0

    def test_goal_ray_range_feature(self):
        m = 8
        ranges = np.full(m, 10.0)
        ranges[2] = 4.0  # bearing pi/2
        scan = Scan(ranges=ranges, max_range=10.0)
        g = np.array([0.0, 4.2])  # nearest endpoint is ray 2's
        mem = SwitchMemory.initial(RobotState(0, 0, 0))
        obs = build_observation(scan, g, RobotState(0, 0, 0), g, mem, force_zero(), 0.0)
        assert obs[m + 13] == 4.0


class TestStack:
    def test_initial_padding(self):
        rows = [np.array([1.0, 2.0])]
        out = stack(rows, 10)
        assert out.shape == (10, 2)
        assert (out == rows[0]).all()

    def test_partial_padding(self):
        rows = [np.full(3, float(i)) for i in range(5)]  # t = 4
        out = stack(rows, 10)
        assert out.shape == (10, 3)
        for r in range(6):
            np.testing.assert_array_equal(out[r], rows[0])
        for r in range(6, 10):
            np.testing.assert_array_equal(out[r], rows[r - 5])

    def test_sliding_window(self):
        rows = [np.array([float(i)]) for i in range(101)]
        out = stack(rows, 10)
        np.testing.assert_array_equal(out[:, 0], np.arange(91, 101, dtype=float))

    def test_no_padding_after_warmup(self):
        rows = [np.array([float(i)]) for i in range(10)]
        out = stack(rows, 10)
        np.testing.assert_array_equal(out[:, 0], np.arange(10, dtype=float))

    def test_empty_buffer_rejected(self):
        with pytest.raises(ValueError):
            stack([], 10)

    def test_buffer_window_matches_stack(self):
        buf = EpisodeBuffer()
        rows = [np.array([float(i), 1.0]) for i in range(7)]
        for r in rows:
            buf.append(r)
        np.testing.assert_array_equal(buf.window(12), stack(rows, 12))


class TestForward:
    def test_zero_weights_give_half(self):
        bundle = WeightsBundle.zeros(16, TINY)
        obs = np.random.default_rng(0).normal(size=(TINY.t_seq, 16 + OBS_EXTRA))
        assert vit_forward(obs, bundle) == 0.5

    def test_output_in_unit_interval_and_deterministic(self):
        bundle = WeightsBundle.random(16, TINY, seed=1)
        rng = np.random.default_rng(2)
        obs = rng.normal(size=(TINY.t_seq, 16 + OBS_EXTRA))
        first = vit_forward(obs, bundle)
        assert 0.0 <= first <= 1.0
        for _ in range(100):
            assert vit_forward(obs, bundle) == first

    def test_head_bias_shifts_logit_exactly(self):
        bundle = WeightsBundle.random(16, TINY, seed=3)
        obs = np.random.default_rng(4).normal(size=(TINY.t_seq, 16 + OBS_EXTRA))
        p0 = vit_forward(obs, bundle)
        logit0 = math.log(p0 / (1 - p0))
        shift = 0.75
        bundle.tensors["head.fc3.bias"] = bundle.tensors["head.fc3.bias"] + np.float32(shift)
        p1 = vit_forward(obs, bundle)
        logit1 = math.log(p1 / (1 - p1))
        assert logit1 - logit0 == pytest.approx(shift, abs=1e-5)

    def test_shape_mismatch_rejected(self):
        bundle = WeightsBundle.zeros(16, TINY)
        with pytest.raises(WeightsError):
            vit_forward(np.zeros((TINY.t_seq + 1, 16 + OBS_EXTRA)), bundle)

    def test_normalization_applied(self):
        bundle = WeightsBundle.random(4, TINY, seed=5)
        d = 4 + OBS_EXTRA
        obs = np.random.default_rng(6).normal(size=(TINY.t_seq, d))
        p_raw = vit_forward(obs, bundle)
        mean = np.full(d, 2.0, dtype=np.float32)
        std = np.full(d, 3.0, dtype=np.float32)
        bundle.normalization = (mean, std)
        p_norm = vit_forward(obs, bundle)
        p_manual = vit_forward((obs - 2.0) / 3.0, WeightsBundle(4, TINY, bundle.tensors))
        assert p_norm == pytest.approx(p_manual, abs=1e-6)
        assert p_norm != p_raw


class TestWeightsFile:
    def test_round_trip_bit_exact(self, tmp_path):
        bundle = WeightsBundle.random(16, TINY, seed=7)
        path = tmp_path / "w.bin"
        save_weights(bundle, path)
        loaded = load_weights(path)
        assert loaded.ray_count == 16
        assert loaded.config == TINY
        assert set(loaded.tensors) == set(bundle.tensors)
        for name, arr in bundle.tensors.items():
            assert loaded.tensors[name].dtype == np.float32
            np.testing.assert_array_equal(loaded.tensors[name], arr)

    def test_manifest_is_one_json_line(self, tmp_path):
        import json

        bundle = WeightsBundle.zeros(4, TINY)
        path = tmp_path / "w.bin"
        save_weights(bundle, path)
        with open(path, "rb") as f:
            manifest = json.loads(f.readline().decode("utf-8"))
        assert manifest["M"] == 4
        assert manifest["T_seq"] == TINY.t_seq
        assert {t["name"] for t in manifest["tensors"]} == set(tensor_shapes(TINY, 4 + OBS_EXTRA))

    def test_missing_tensor_rejected(self, tmp_path):
        bundle = WeightsBundle.zeros(4, TINY)
        del bundle.tensors["head.fc3.bias"]
        with pytest.raises(WeightsError):
            save_weights(bundle, tmp_path / "w.bin")

    def test_bad_shape_rejected(self, tmp_path):
        bundle = WeightsBundle.zeros(4, TINY)
        bundle.tensors["patch.bias"] = np.zeros(TINY.embed_dim + 1, dtype=np.float32)
        with pytest.raises(WeightsError):
            save_weights(bundle, tmp_path / "w.bin")

    def test_forward_identical_after_reload(self, tmp_path):
        bundle = WeightsBundle.random(8, TINY, seed=9)
        path = tmp_path / "w.bin"
        save_weights(bundle, path)
        loaded = load_weights(path)
        obs = np.random.default_rng(10).normal(size=(TINY.t_seq, 8 + OBS_EXTRA))
        assert vit_forward(obs, loaded) == vit_forward(obs, bundle)


class TestParityFixture:
    """Frozen cross-implementation oracle: weights and expected outputs were
    produced by the training pipeline's independent forward pass (see
    trainer/scripts/make_parity_fixture.py)."""

    def test_matches_trainer_forward_within_1e4(self):
        import json
        import pathlib

        fixtures = pathlib.Path(__file__).parent / "fixtures"
        bundle = load_weights(fixtures / "parity_weights.bin")
        data = json.loads((fixtures / "parity_cases.json").read_text())
        assert bundle.ray_count == data["M"]
        assert len(data["cases"]) == 8
        for case in data["cases"]:
            window = np.asarray(case["window"], dtype=np.float32)
            got = vit_forward(window, bundle)
            assert got == pytest.approx(case["probability"], abs=1e-4)


class TestOverride:
    def test_forced_apf(self):
        theta, i_dir = ls_override(0.12, 1, wf_prob=0.1, params=PARAMS)
        assert theta == 0.0 and i_dir == 1

    def test_forced_wf_escalates_once(self):
        theta, i_dir = ls_override(0.0, 1, wf_prob=0.9, params=PARAMS)
        assert theta == pytest.approx(2 * math.pi / 100)
        assert i_dir == 1

    def test_agreement_passes_through(self):
        theta, i_dir = ls_override(0.06, 1, wf_prob=0.9, params=PARAMS)
        assert theta == 0.06 and i_dir == 1

    def test_threshold_at_half(self):
        assert ls_override(0.0, -1, wf_prob=0.5, params=PARAMS)[0] == pytest.approx(-PARAMS.theta_upd)
        assert ls_override(0.3, 1, wf_prob=0.49999, params=PARAMS)[0] == 0.0

    def test_override_preserves_sign_coupling(self):
        for theta_rs, i_dir in [(0.0, 1), (0.0, -1), (0.3, 1), (-0.3, -1)]:
            for target in (0, 1):
                theta, d = apply_mode_override(theta_rs, i_dir, target, PARAMS)
                assert theta * d >= 0.0
                assert (theta != 0.0) == (target == 1)


def test_vit_config_validation():
    with pytest.raises(ValueError):
        ViTConfig(embed_dim=30, heads=4)
    cfg = ViTConfig()
    assert cfg.encoder_layers == 3 and cfg.embed_dim == 512 and cfg.mlp_dim == 512
