import numpy as np
import pytest
from hypothesis import given, strategies as st

from flagrep.circuit import build_memory_experiment
from flagrep.frame import reference_record
from flagrep.pauli import build_layout
from flagrep.syndrome import (compute_syndromes, defects, flat_defects, read_syndromes_csv,
                              write_syndromes_csv)


def by_definition(bits, layout, prog, R, state):
    """Patch parities XORed between consecutive rounds, straight from measurement indices."""
    idx = prog.measurement_index
    d, ns = layout.distance, layout.n_synd
    patch = [[sum(int(bits[idx[(q, r)]]) for q in layout.patch(s)) % 2 for s in range(ns)]
             for r in range(R)]
    data = [int(bits[idx[(q, 0)]]) for q in layout.data_qubits]
    init = 1 if state in ("1", "-") else 0
    out = np.zeros((R + 1, ns), dtype=np.uint8)
    for s in range(ns):
        out[0, s] = patch[0][s] ^ (init ^ init)  # prepared data have even parity
        for t in range(1, R):
            out[t, s] = patch[t - 1][s] ^ patch[t][s]
        out[R, s] = patch[R - 1][s] ^ data[s] ^ data[s + 1]
    return out


def setup(d, f, state, R):
    lay = build_layout(d, f, "Z" if state in "01" else "X")
    return lay, build_memory_experiment(lay, R, state)


@given(st.integers(3, 7), st.integers(0, 2), st.sampled_from("01+-"), st.integers(1, 4), st.data())
def test_matches_definition(d, f, state, R, data):
    lay, prog = setup(d, f, state, R)
    bits = np.array(data.draw(st.lists(st.integers(0, 1), min_size=prog.num_measurements,
                                       max_size=prog.num_measurements)), dtype=np.uint8)
    got = compute_syndromes(bits, lay, R, state)
    assert got.shape == (R + 1, d - 1)
    assert np.array_equal(got, by_definition(bits, lay, prog, R, state))


@given(st.integers(3, 6), st.integers(0, 2), st.integers(1, 3), st.data())
def test_gf2_linearity(d, f, R, data):
    lay, prog = setup(d, f, "0", R)
    m = prog.num_measurements
    draw = lambda: np.array(data.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m)),
                            dtype=np.uint8)
    a, b = draw(), draw()
    syn = lambda x: compute_syndromes(x, lay, R, "0")
    assert np.array_equal(syn(a ^ b), syn(a) ^ syn(b) ^ syn(np.zeros(m, dtype=np.uint8)))


@pytest.mark.parametrize("f", [0, 1, 2])
def test_single_measurement_flip_gives_time_pair(f):
    d, R = 5, 4
    lay, prog = setup(d, f, "0", R)
    for r in range(R):
        for s in range(d - 1):
            for q in lay.patch(s):
                bits = reference_record(prog).copy()
                bits[prog.measurement_index[(q, r)]] ^= 1
                assert defects(compute_syndromes(bits, lay, R, "0")) == [(r, s), (r + 1, s)]


def test_flagged_round_grouping():
    lay, prog = setup(3, 1, "0", 3)
    bits = reference_record(prog)
    assert prog.num_measurements == 21
    syn = compute_syndromes(bits, lay, 3, "0")
    assert syn.shape == (4, 2) and not syn.any()


def test_batch_equals_single():
    lay, prog = setup(3, 2, "1", 2)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, (20, prog.num_measurements)).astype(np.uint8)
    batch = compute_syndromes(bits, lay, 2, "1")
    assert all(np.array_equal(batch[i], compute_syndromes(bits[i], lay, 2, "1")) for i in range(20))
    with pytest.raises(ValueError):
        compute_syndromes(bits[:, :-1], lay, 2, "1")


def test_defect_extraction():
    assert defects(np.zeros((4, 2), dtype=np.uint8)) == []
    one = np.zeros((4, 2), dtype=np.uint8)
    one[2, 1] = 1
    assert defects(one) == [(2, 1)]
    assert flat_defects(one) == (5,)
    checker = (np.indices((4, 2)).sum(axis=0) % 2).astype(np.uint8)
    assert len(defects(checker)) == 4


def test_csv_round_trip(tmp_path):
    lay = build_layout(5, 1)
    arr = np.random.default_rng(1).integers(0, 2, (30, 4, 4)).astype(np.uint8)
    path = tmp_path / "syn.csv"
    write_syndromes_csv(path, arr, lay, 3)
    assert path.read_text().splitlines()[0].startswith("t0_s1,t0_s2")
    assert np.array_equal(read_syndromes_csv(path, lay, 3), arr)
    with pytest.raises(ValueError):
        read_syndromes_csv(path, build_layout(3, 1), 3)
