import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_ids import netmodel as nm
from adaptive_ids.dataset import (LIVE_FEATURES, LIVE_SCHEMA, NSL_KDD_FEATURES, FlowWindower, LabeledDataset,
                                  apply_minmax, extract_flow_features, fit_minmax, group_windows,
                                  load_labeled_csv, payload_entropy, save_generic_csv, stratified_kfold)
from adaptive_ids.errors import (ColumnCountMismatch, EmptyDataset, EmptyFile, EmptyWindow, TooFewSamples,
                                 UnparsableNumber)
from adaptive_ids.netmodel import RawFrame, decode_frame

MAC = "02:00:00:00:00:01"
T0 = 1_700_000_000_000_000


def tcp(ts, src, dst, sport, dport, flags, payload=b""):
    return decode_frame(RawFrame(ts, nm.tcp_frame(MAC, MAC, src, dst, sport, dport, flags, payload)))


def test_windows_are_bidirectional_and_tumbling():
    pkts = [tcp(T0 + 10, "1.1.1.1", "2.2.2.2", 5000, 80, nm.TCP_SYN),
            tcp(T0 + 20, "2.2.2.2", "1.1.1.1", 80, 5000, nm.TCP_SYN | nm.TCP_ACK),
            tcp(T0 + 1_000_005, "1.1.1.1", "2.2.2.2", 5000, 80, nm.TCP_ACK)]
    ws = group_windows(pkts)
    assert len(ws) == 2
    assert ws[0].key == ("1.1.1.1", "2.2.2.2", "TCP") and len(ws[0].packets) == 2
    assert ws[0].start_us == T0 and ws[1].start_us == T0 + 1_000_000


def test_windower_rejects_time_travel():
    w = FlowWindower()
    w.add(tcp(T0 + 2_000_000, "1.1.1.1", "2.2.2.2", 1, 2, 0))
    with pytest.raises(ValueError):
        w.add(tcp(T0, "1.1.1.1", "2.2.2.2", 1, 2, 0))


def test_features_by_hand():
    pkts = [tcp(T0, "1.1.1.1", "2.2.2.2", 5000, 80, nm.TCP_SYN),
            tcp(T0 + 1000, "2.2.2.2", "1.1.1.1", 80, 5000, nm.TCP_SYN | nm.TCP_ACK),
            tcp(T0 + 3000, "1.1.1.1", "2.2.2.2", 5000, 81, nm.TCP_ACK, b"aaaa")]
    (w,) = group_windows(pkts)
    f = dict(zip(LIVE_FEATURES, extract_flow_features(w)))
    sizes = [p.frame_len for p in pkts]
    assert f["packet_count"] == 3
    assert f["byte_count"] == sum(sizes)
    assert f["mean_packet_size"] == pytest.approx(sum(sizes) / 3)
    assert f["packet_rate"] == pytest.approx(3.0)  # packets per second of window length
    assert f["tcp_syn_ratio"] == pytest.approx(1 / 3)
    assert f["tcp_flag_entropy"] == pytest.approx(np.log2(3))
    assert f["unique_dst_ports"] == 3  # 80, 5000, 81
    assert f["icmp_ratio"] == 0 and f["arp_ratio"] == 0
    assert f["mean_payload_entropy"] == pytest.approx(0.0)
    assert f["mean_interarrival_us"] == pytest.approx(1500)
    assert f["direction_ratio"] == pytest.approx(2 / 3)


def test_payload_entropy():
    assert payload_entropy(b"") == 0.0
    assert payload_entropy(b"aaaa") == 0.0
    assert payload_entropy(bytes(range(256))) == pytest.approx(8.0)


def test_empty_window():
    from adaptive_ids.dataset import FlowWindow
    with pytest.raises(EmptyWindow):
        extract_flow_features(FlowWindow(("a", "b", "TCP"), 0, ()))


def test_generic_csv_round_trip(tmp_path, blob_ds):
    path = tmp_path / "d.csv"
    save_generic_csv(blob_ds, path)
    back = load_labeled_csv(path)
    assert np.array_equal(back.X, blob_ds.X) and np.array_equal(back.y, blob_ds.y)
    assert back.feature_names == blob_ds.feature_names


def test_generic_csv_live_schema_detected(tmp_path):
    ds = LabeledDataset(np.ones((4, 12)), np.array([1, -1, 1, -1]), LIVE_FEATURES, LIVE_SCHEMA)
    save_generic_csv(ds, tmp_path / "l.csv")
    assert load_labeled_csv(tmp_path / "l.csv").schema_id == LIVE_SCHEMA


def test_generic_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,label\n1,2,1\n1,2\n")
    with pytest.raises(ColumnCountMismatch):
        load_labeled_csv(p)
    p.write_text("a,b,label\n1,zz,1\n")
    with pytest.raises(UnparsableNumber) as e:
        load_labeled_csv(p)
    assert (e.value.row, e.value.column) == (2, 2)
    p.write_text("\n\n")
    with pytest.raises(EmptyFile):
        load_labeled_csv(p)


def test_nsl_kdd_loader(nsl_subset):
    assert nsl_subset.X.shape == (500, 41)
    assert nsl_subset.feature_names == NSL_KDD_FEATURES
    assert set(np.unique(nsl_subset.y)) == {-1, 1}
    # symbolic columns become small integer codes
    assert nsl_subset.X[:, 1].max() <= 2


def test_nsl_kdd_wrong_width(tmp_path):
    p = tmp_path / "n.csv"
    p.write_text("0,tcp,http,SF,1,2\n")
    with pytest.raises(ColumnCountMismatch):
        load_labeled_csv(p, "nsl_kdd")


def test_minmax():
    X = np.array([[0.0, 5.0, 1.0], [10.0, 5.0, 3.0]])
    p = fit_minmax(X)
    assert np.allclose(apply_minmax(p, X), [[0, 0, 0], [1, 0, 1]])
    assert np.allclose(apply_minmax(p, [20.0, 7.0, 2.0]), [1, 0, 0.5])  # clamped, constant column -> 0
    with pytest.raises(EmptyDataset):
        fit_minmax(np.empty((0, 3)))


@settings(max_examples=60, deadline=None)
@given(n_pos=st.integers(2, 40), n_neg=st.integers(2, 40), k=st.integers(2, 10), seed=st.integers(0, 10_000))
def test_stratified_kfold_properties(n_pos, n_neg, k, seed):
    if min(n_pos, n_neg) < k:
        with pytest.raises(TooFewSamples):
            stratified_kfold(np.array([1] * n_pos + [-1] * n_neg), k, seed)
        return
    y = np.random.default_rng(seed).permutation(np.array([1] * n_pos + [-1] * n_neg))
    folds = stratified_kfold(y, k, seed)
    assert len(folds) == k
    seen = np.concatenate([test for _, test in folds])
    assert sorted(seen.tolist()) == list(range(len(y)))  # coverage, disjoint
    sizes = [len(t) for _, t in folds]
    assert max(sizes) - min(sizes) <= 1
    for train, test in folds:
        assert not set(train) & set(test)
        assert len(train) + len(test) == len(y)
        pos = int(np.sum(y[test] == 1))
        assert abs(pos - n_pos / k) < 1  # each class spread within one of its even share
    assert [t.tolist() for _, t in stratified_kfold(y, k, seed)] == [t.tolist() for _, t in folds]
