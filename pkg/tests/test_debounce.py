import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gesturelab.debounce import Debouncer, edge_events


def ref_outputs(pushes, depth, threshold):
    # brute force: recompute the window from the full accepted history
    accepted = [n if (p is not None and p > threshold) else 0 for n, p in pushes]
    outs = []
    for i in range(len(accepted)):
        window = ([0] * depth + accepted[:i + 1])[-depth:]
        outs.append(window[0] if window[0] != 0 and len(set(window)) == 1 else 0)
    return outs


def run(pushes, depth=5, threshold=0.95):
    deb = Debouncer(depth=depth, threshold=threshold)
    return [deb.push(n, p) for n, p in pushes]


def test_confirms_after_full_window():
    assert run([(2, 0.99)] * 5) == [0, 0, 0, 0, 2]


def test_confirmation_holds_while_input_holds():
    assert run([(2, 0.99)] * 7)[-3:] == [2, 2, 2]


def test_low_confidence_breaks_run():
    pushes = [(2, 0.99)] * 4 + [(2, 0.90)] + [(2, 0.99)] * 5
    outs = run(pushes)
    assert outs[:9] == [0] * 9 and outs[9] == 2


def test_threshold_is_strict():
    assert run([(2, 0.95)] * 8) == [0] * 8


def test_none_probability_counts_as_rejection():
    pushes = [(3, 0.99)] * 4 + [(3, None)] + [(3, 0.99)] * 4
    assert run(pushes) == [0] * 9


def test_class_switch_restarts_count():
    pushes = [(1, 0.99)] * 4 + [(2, 0.99)] * 5
    outs = run(pushes)
    assert outs[:8] == [0] * 8 and outs[8] == 2


def test_depth_one_reports_immediately():
    assert run([(7, 0.99), (7, 0.2), (4, 0.99)], depth=1) == [7, 0, 4]


def test_reset_clears_progress():
    deb = Debouncer(depth=3)
    for _ in range(3):
        deb.push(5, 0.99)
    deb.reset()
    assert deb.window == (0, 0, 0)
    assert deb.push(5, 0.99) == 0


def test_constructor_validation():
    with pytest.raises(ValueError):
        Debouncer(depth=0)
    with pytest.raises(ValueError):
        Debouncer(threshold=1.5)


@given(
    pushes=st.lists(
        st.tuples(st.integers(0, 3),
                  st.one_of(st.none(), st.sampled_from([0.2, 0.9, 0.95, 0.96, 0.99]))),
        max_size=40,
    ),
    depth=st.integers(1, 6),
)
@settings(max_examples=200, deadline=None)
def test_matches_brute_force_reference(pushes, depth):
    assert run(pushes, depth=depth) == ref_outputs(pushes, depth, 0.95)


# --- edge extraction ----------------------------------------------------------

def test_single_event_per_held_gesture():
    assert list(edge_events([0, 0, 3, 3, 3, 0])) == [(2, 3)]


def test_gesture_can_refire_after_release():
    assert list(edge_events([0, 3, 3, 0, 3])) == [(1, 3), (4, 3)]


def test_direct_class_switch_fires_new_event():
    assert list(edge_events([1, 1, 2, 2])) == [(0, 1), (2, 2)]


def test_no_events_on_silence():
    assert list(edge_events([0, 0, 0])) == []
