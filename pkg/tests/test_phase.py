import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagingroe.dist import explicit, power_law, uniform
from pagingroe.phase import big_small_phases, kprime_phases, kprime_threshold, marking_phases


def test_marking_basic():
    rep = marking_phases([1, 2, 1, 3, 4], 2)
    assert rep.boundaries == [(0, 3), (3, 5)]
    assert rep.complete.tolist() == [True, False]


def test_marking_single_incomplete_phase():
    rep = marking_phases([1, 1, 1, 1], 2)
    assert len(rep) == 1
    assert rep.complete.tolist() == [False]


def test_marking_clean_pages():
    rep = marking_phases([1, 2, 3, 4, 1, 2], 2)
    assert rep.boundaries == [(0, 2), (2, 4), (4, 6)]
    assert rep.clean[1:].tolist() == [2, 2]


def test_marking_clean_counts_only_new_pages():
    rep = marking_phases([1, 2, 2, 3, 2, 1, 4], 2)
    # phases [1,2,2] [3,2] [1,4]: 2 carries over, 3 does not
    assert rep.boundaries == [(0, 3), (3, 5), (5, 7)]
    assert rep.clean[1:].tolist() == [1, 2]


def test_big_small_examples():
    rep = big_small_phases([3, 1, 3, 2], 2)
    assert len(rep) == 1 and rep.complete.tolist() == [True]
    assert (rep.clean[0], rep.small[0]) == (1, 2)

    rep = big_small_phases([1], 1)
    assert rep.complete.tolist() == [True]
    assert (rep.clean[0], rep.small[0]) == (0, 0)

    rep = big_small_phases([1, 2, 3], 2)
    assert rep.boundaries == [(0, 2), (2, 3)]
    assert rep.complete.tolist() == [True, False]
    assert (rep.clean[0], rep.small[0]) == (0, 0)


def test_big_small_needs_ranks():
    with pytest.raises(ValueError):
        big_small_phases([0, 1], 1)


def test_kprime_examples():
    rep = kprime_phases([1, 1, 2, 2, 3], 2)
    assert rep.boundaries == [(0, 3), (3, 5)]
    assert rep.complete.tolist() == [True, True]
    rep = kprime_phases([1, 1, 2, 2, 3, 3], 2)
    assert rep.complete.tolist() == [True, True, False]

    rep = kprime_phases([4, 4, 2, 7], 1)
    assert rep.lengths.tolist() == [1, 1, 1, 1]
    assert rep.complete.all()

    rep = kprime_phases([1, 2, 1], 3)
    assert len(rep) == 1 and not rep.complete[0]


def test_kprime_threshold():
    assert kprime_threshold(uniform(4), 2) == 3
    assert kprime_threshold(power_law(1, 4), 2) == 2
    with pytest.raises(ValueError):
        kprime_threshold(explicit([1.0]), 1)


def test_phase_report_file(tmp_path):
    rep = big_small_phases([3, 1, 3, 2, 1], 2)
    path = tmp_path / "phases.txt"
    rep.write(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# start end complete distinct s f"
    assert len(lines) == 1 + len(rep)


@settings(max_examples=200, deadline=None)
@given(seq=st.lists(st.integers(1, 9), min_size=1, max_size=120), k=st.integers(1, 5))
def test_marking_structure(seq, k):
    rep = marking_phases(seq, k)
    assert rep.starts[0] == 0 and rep.ends[-1] == len(seq)
    assert np.all(rep.starts[1:] == rep.ends[:-1])
    for (a, b), done, d in zip(rep.boundaries, rep.complete, rep.distinct):
        assert len(set(seq[a:b])) == d
        if done:
            assert d == k
            # the next request opens a new page
            assert seq[b] not in set(seq[a:b])
        else:
            assert d <= k
