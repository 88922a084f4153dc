import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from duallstm import geometry as G
from duallstm.dataset import (FEET, DataError, SynthConfig, Track, anchor_indices,
                              detect_lane_changes, format_trajectory_rows, label_anchors,
                              parse_trajectory_file, slice_windows, split_train_val,
                              synth_generate, write_trajectory_file)
from duallstm.geometry import LaneGeometry
from duallstm.intention import label_intention

GEOM = LaneGeometry()


def row(vid, frame, x=5.0, y=10.0, v=20.0, a=0.0, lane=2):
    cols = [vid, frame, 0, 0, x, y, 0, 0, 15.0, 6.0, 2, v, a, lane, 0, 0, 0, 0]
    return " ".join(str(c) for c in cols)


def make_track(x, vid=1, v=25.0):
    n = len(x)
    return Track(vehicle_id=vid, frame=np.arange(1, n + 1), local_x=np.asarray(x, float),
                 local_y=v * 0.1 * np.arange(n), speed=np.full(n, v), accel=np.zeros(n),
                 lane_id=GEOM.lane_of(x), length=np.full(n, 4.5), v_class=np.full(n, 2))


# ---------------------------------------------------------------- parsing

def test_parse_empty():
    assert parse_trajectory_file(io.BytesIO(b"")) == []


def test_parse_interleaved_vehicles_sorted():
    lines = [row(2, 12), row(1, 11), row(2, 10), row(1, 10), row(2, 11), row(1, 12)]
    tracks = parse_trajectory_file("\n".join(lines).encode())
    assert [t.vehicle_id for t in tracks] == [1, 2]
    for t in tracks:
        assert len(t) == 3 and list(t.frame) == [10, 11, 12]


def test_parse_feet_conversion():
    (t,) = parse_trajectory_file(row(1, 1, x=12.0).encode(), "feet")
    assert t.local_x[0] == pytest.approx(3.6576, abs=1e-12)
    assert t.speed[0] == pytest.approx(20.0 * FEET)
    (m,) = parse_trajectory_file(row(1, 1, x=12.0).encode(), "meters")
    assert m.local_x[0] == 12.0


def test_parse_header_commas_and_gaps():
    text = "Vehicle_ID,Frame_ID,rest\n" + "\n".join(
        row(7, f).replace(" ", ",") for f in (1, 2, 3, 7, 8))
    tracks = parse_trajectory_file(text.encode())
    assert [list(t.frame) for t in tracks] == [[1, 2, 3], [7, 8]]
    assert all(t.vehicle_id == 7 for t in tracks)


def test_parse_skips_few_malformed_rows():
    lines = [row(1, f) for f in range(1, 201)]
    lines[50] = "1 51 garbage"
    tracks = parse_trajectory_file("\n".join(lines).encode())
    assert sum(len(t) for t in tracks) == 199


def test_parse_rejects_many_malformed_rows(tmp_path):
    lines = [row(1, f) for f in range(1, 51)]
    lines[9] = "not a row at all"
    lines[20] = "1 21 x y z"
    path = tmp_path / "bad.txt"
    path.write_text("\n".join(lines))
    with pytest.raises(DataError, match=r"bad\.txt.*line 10"):
        parse_trajectory_file(path)


def test_parse_unreadable(tmp_path):
    with pytest.raises(DataError):
        parse_trajectory_file(tmp_path / "missing.txt")


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_round_trip(seed, tmp_path):
    tracks = synth_generate(SynthConfig(n_lk=2, n_llc=1, n_rlc=1, duration_s=20.0), seed)
    path = tmp_path / "tracks.txt"
    write_trajectory_file(path, tracks)
    back = parse_trajectory_file(path)
    assert len(back) == len(tracks)
    for a, b in zip(sorted(tracks, key=lambda t: t.vehicle_id), back):
        assert a == b


# ---------------------------------------------------------------- events and labels

def test_centerline_track_has_no_events():
    assert detect_lane_changes(make_track(np.full(200, GEOM.centerline(3))), GEOM) == []


def test_detects_synthetic_left_change():
    cfg = SynthConfig(n_lk=0, n_llc=1, n_rlc=0, duration_s=30.0)
    (tr,) = synth_generate(cfg, seed=11)
    (ev,) = detect_lane_changes(tr, GEOM)
    assert ev.direction == "left" and ev.to_lane == ev.from_lane - 1
    assert abs(ev.t_cross - tr.scheduled.t_cross) <= 2


def test_aborted_change_is_not_an_event():
    x = np.full(300, GEOM.centerline(3))
    x[100:110] = GEOM.centerline(2)  # 1 s in the other lane, then back
    assert detect_lane_changes(make_track(x), GEOM) == []


def test_change_needs_full_dwell():
    x = np.full(300, GEOM.centerline(3))
    x[100:] = GEOM.centerline(4)
    (ev,) = detect_lane_changes(make_track(x), GEOM)
    assert ev.t_cross == 100 and ev.direction == "right"
    assert detect_lane_changes(make_track(x[:119]), GEOM) == []  # only 19 frames after
    assert len(detect_lane_changes(make_track(x[:120]), GEOM)) == 1


def test_flicker_at_marking_gives_one_event():
    x = np.full(300, GEOM.centerline(3))
    x[100:] = GEOM.centerline(4)
    x[[98, 101]] = GEOM.marking_positions[3] + np.array([0.01, -0.01])  # 3,3,4,3,3,4,4 ...
    (ev,) = detect_lane_changes(make_track(x), GEOM)
    assert ev.t_cross == 98 and ev.from_lane == 3 and ev.to_lane == 4


def test_double_jump_is_ignored():
    x = np.full(300, GEOM.centerline(2))
    x[100:] = GEOM.centerline(4)
    assert detect_lane_changes(make_track(x), GEOM) == []


def test_labels():
    x = np.full(400, GEOM.centerline(3))
    x[200:] = GEOM.centerline(2)
    tr = make_track(x)
    assert label_intention(make_track(np.full(400, 5.0)), GEOM, 100).cls == G.LK
    assert label_intention(tr, GEOM, 180).cls == G.LLC      # 2 s before
    assert label_intention(tr, GEOM, 100).cls == G.LK       # 10 s before
    assert label_intention(tr, GEOM, 160).cls == G.LLC      # 4 s before, first labelled frame
    assert label_intention(tr, GEOM, 159).cls == G.LK
    assert label_intention(tr, GEOM, 199).cls == G.LLC
    assert label_intention(tr, GEOM, 200).cls == G.LK       # already in the new lane
    lab = label_intention(tr, GEOM, 180)
    assert np.array_equal(lab.one_hot, [0, 1, 0]) and lab.name == "LLC"


def test_overlapping_intervals_nearest_crossing_wins():
    events = detect_lane_changes(make_track(np.r_[np.full(100, GEOM.centerline(3)),
                                                  np.full(30, GEOM.centerline(2)),
                                                  np.full(100, GEOM.centerline(3))]), GEOM)
    assert [e.direction for e in events] == ["left", "right"]
    labels = label_anchors(np.arange(60, 130), events)
    assert np.all(labels[(np.arange(60, 130) >= 60) & (np.arange(60, 130) < 100)] == G.LLC)
    assert np.all(labels[(np.arange(60, 130) >= 100)] == G.RLC)


def test_labelled_windows_have_adjacent_target_lane():
    tracks = synth_generate(SynthConfig(n_lk=3, n_llc=4, n_rlc=4, duration_s=40.0), seed=5)
    s = slice_windows(tracks, GEOM)
    lc = s.label != G.LK
    assert lc.any()
    assert np.all(np.abs(s.target_lane[lc] - s.current_lane[lc]) == 1)
    assert np.all(s.target_lane[~lc] == s.current_lane[~lc])


# ---------------------------------------------------------------- windows and split

@pytest.mark.parametrize("n,count", [(99, 0), (100, 1), (150, 6)])
def test_slice_counts(n, count):
    s = slice_windows([make_track(np.full(n, GEOM.centerline(2)))], GEOM)
    assert len(s) == count


def test_slice_anchor_frames_for_150():
    s = slice_windows([make_track(np.full(150, GEOM.centerline(2)))], GEOM)
    assert list(s.frame) == [50, 60, 70, 80, 90, 100]


@given(st.integers(0, 2000))
def test_anchor_formula(n):
    expected = (n - 100) // 10 + 1 if n >= 100 else 0
    assert len(anchor_indices(n)) == expected


def test_history_only_slicing_counts_skips():
    tr = make_track(np.full(150, GEOM.centerline(2)))
    s = slice_windows([tr], GEOM, require_future=False)
    assert list(s.anchor) == list(range(49, 150, 10))
    assert s.skipped == 4  # grid points 9, 19, 29, 39 lack history
    assert np.all(np.isnan(s.future_x[-1, 1:])) and not np.isnan(s.future_x[0]).any()


def _equal_vehicle_set(n_vehicles, frames=150):
    return slice_windows([make_track(np.full(frames, GEOM.centerline(2)), vid=v)
                          for v in range(1, n_vehicles + 1)], GEOM)


def test_split_single_vehicle_goes_to_one_side():
    tr, va = split_train_val(_equal_vehicle_set(1), 0.7, seed=0)
    assert {len(tr), len(va)} == {0, 6}


def test_split_ten_vehicles():
    tr, va = split_train_val(_equal_vehicle_set(10), 0.7, seed=3)
    assert len(np.unique(tr.vehicle_id)) == 7 and len(np.unique(va.vehicle_id)) == 3


def test_split_deterministic_and_leak_free():
    samples = slice_windows(synth_generate(SynthConfig(n_lk=40, n_llc=10, n_rlc=10,
                                                       duration_s=30.0), 2), GEOM)
    a = split_train_val(samples, 0.7, seed=9)
    b = split_train_val(samples, 0.7, seed=9)
    assert np.array_equal(a[0].anchor, b[0].anchor) and np.array_equal(a[1].vehicle_id, b[1].vehicle_id)
    tr, va = a
    assert not set(tr.vehicle_id) & set(va.vehicle_id)
    assert set(tr.vehicle_id) | set(va.vehicle_id) == set(samples.vehicle_id)
    assert len(tr) + len(va) == len(samples)
    assert abs(len(tr) / len(samples) - 0.7) <= 0.02


def test_split_empty():
    tr, va = split_train_val(slice_windows([], GEOM), 0.7)
    assert len(tr) == 0 and len(va) == 0


# ---------------------------------------------------------------- synthetic generator

def test_synth_noise_free_lane_keeping_is_constant():
    (tr,) = synth_generate(SynthConfig(n_lk=1, n_llc=0, n_rlc=0, duration_s=20.0,
                                       noise_lateral=0.0), seed=1)
    assert np.all(tr.local_x == tr.local_x[0])
    assert tr.local_x[0] in GEOM.centerline_positions


def test_synth_noise_free_left_change_moves_one_lane():
    (tr,) = synth_generate(SynthConfig(n_lk=0, n_llc=1, n_rlc=0, duration_s=30.0,
                                       noise_lateral=0.0), seed=1)
    assert tr.local_x[-1] - tr.local_x[0] == pytest.approx(-GEOM.lane_width, abs=1e-12)
    k = tr.scheduled.t_cross
    assert GEOM.lane_of(tr.local_x[k]) == tr.scheduled.to_lane
    assert GEOM.lane_of(tr.local_x[k - 1]) == tr.scheduled.from_lane


def test_synth_is_deterministic():
    cfg = SynthConfig(n_lk=3, n_llc=2, n_rlc=2, duration_s=20.0)
    assert format_trajectory_rows(synth_generate(cfg, 4)) == format_trajectory_rows(synth_generate(cfg, 4))
    assert format_trajectory_rows(synth_generate(cfg, 4)) != format_trajectory_rows(synth_generate(cfg, 5))


def test_synth_kinematics_follow_euler_recursion():
    (tr,) = synth_generate(SynthConfig(n_lk=1, n_llc=0, n_rlc=0, duration_s=60.0), seed=8)
    assert np.allclose(tr.speed[1:], tr.speed[:-1] + tr.accel[1:] * 0.1, atol=1e-12)
    assert np.allclose(tr.local_y[1:], tr.local_y[:-1] + tr.speed[1:] * 0.1, atol=1e-9)
    assert tr.speed.min() >= 20.0 - 1e-9 and tr.speed.max() <= 30.0 + 1e-9


def test_synth_recovers_every_scheduled_event():
    tracks = synth_generate(SynthConfig(n_lk=10, n_llc=15, n_rlc=15, duration_s=40.0), seed=21)
    for tr in tracks:
        events = detect_lane_changes(tr, GEOM)
        if tr.scheduled is None:
            assert events == []
        else:
            (ev,) = events
            assert ev.direction == tr.scheduled.direction
            assert abs(ev.t_cross - tr.scheduled.t_cross) <= 2


def test_synth_config_validation(tmp_path):
    with pytest.raises(ValueError):
        synth_generate(SynthConfig(speed_min=30, speed_max=20), 0)
    (tmp_path / "c.txt").write_text("n_lk=1\nbogus=2\n")
    with pytest.raises(ValueError, match="bogus"):
        SynthConfig.from_file(tmp_path / "c.txt")


def test_manifest_lists_counts():
    s = slice_windows(synth_generate(SynthConfig(n_lk=2, n_llc=1, n_rlc=1, duration_s=30.0), 0), GEOM)
    text = s.manifest()
    assert f"windows={len(s)}" in text and "count_LLC=" in text and "skipped_anchors=" in text
