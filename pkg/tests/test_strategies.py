import json
import math
import random

import pytest

from prophet_lab import (
    ArrivalOrder,
    ConfigurationError,
    Instance,
    InvalidParameterError,
    PolicySpec,
    SingleThresholdFamily,
    TableScheduleFamily,
    ThresholdSchedule,
    ceil_frac,
    dirac_instance,
    load_schedule_family,
    run_two_phase,
)
from prophet_lab.strategies import count_cutoff, e_window_cutoff


def test_ceil_frac_exact_at_decimal_boundaries():
    # naive math.ceil(x*n) gets these wrong through float error
    assert ceil_frac(0.1, 30) == 3
    assert ceil_frac(0.3, 10) == 3
    assert ceil_frac(0.7, 10) == 7
    assert ceil_frac(0.2, 15) == 3
    assert ceil_frac(0.0, 7) == 0
    assert ceil_frac(1.0, 7) == 7
    assert ceil_frac(0.5, 3) == 2
    assert ceil_frac(1e-12, 5) == 1
    with pytest.raises(InvalidParameterError):
        ceil_frac(1.2, 5)
    with pytest.raises(InvalidParameterError):
        ceil_frac(0.5, 0)


def test_window_cutoffs():
    assert e_window_cutoff(3) == 2  # ceil(3/e) = ceil(1.103)
    assert e_window_cutoff(1) == 1
    assert e_window_cutoff(6) == 3
    assert count_cutoff(0.0, 9) == 0
    assert count_cutoff(1.0, 9) == 9
    assert count_cutoff(0.5, 9) == 5
    assert count_cutoff(1.0 / 3.0, 9) == 3  # exact thirds survive the epsilon


def test_threshold_schedule_validation():
    s = ThresholdSchedule(thresholds=(0.3, 0.3, 0.8))
    assert s.cutoffs(10) == (3, 3, 8)
    with pytest.raises(InvalidParameterError):
        ThresholdSchedule(thresholds=())
    with pytest.raises(InvalidParameterError):
        ThresholdSchedule(thresholds=(0.5, 0.4))
    with pytest.raises(InvalidParameterError):
        ThresholdSchedule(thresholds=(-0.1,))


def test_single_threshold_family_matches_waiting_cutoff():
    fam = SingleThresholdFamily()
    for n in range(1, 60):
        for t in range(1, n + 1):
            total = n + t
            direct = fam.cutoffs(t, n)
            via_schedule = fam.schedule_for(t / total).cutoffs(total)
            assert direct == via_schedule, (t, n)
            assert direct[0] == max(t, e_window_cutoff(total))


def test_single_threshold_schedule_for():
    fam = SingleThresholdFamily()
    assert fam.schedule_for(0.1).thresholds == (1.0 / math.e,)
    assert fam.schedule_for(0.7).thresholds == (0.7,)
    with pytest.raises(InvalidParameterError):
        fam.schedule_for(1.2)


def test_table_family_left_constant_lookup():
    fam = TableScheduleFamily([0.2, 0.5], [[0.4], [0.6, 0.9]])
    assert fam.schedule_for(0.2).thresholds == (0.4,)
    assert fam.schedule_for(0.49).thresholds == (0.4,)
    assert fam.schedule_for(0.5).thresholds == (0.6, 0.9)
    assert fam.schedule_for(1.0).thresholds == (0.6, 0.9)
    with pytest.raises(ConfigurationError):
        fam.schedule_for(0.1)  # below the tabulated range
    with pytest.raises(ConfigurationError):
        TableScheduleFamily([0.5, 0.2], [[0.4], [0.6]])
    with pytest.raises(ConfigurationError):
        TableScheduleFamily([], [])


def test_load_schedule_family(tmp_path):
    path = tmp_path / "sched.json"
    path.write_text(json.dumps({"p_grid": [0.0, 0.5], "schedules": [[0.37], [0.5, 0.8]]}))
    fam = load_schedule_family(str(path))
    assert fam.p_grid == (0.0, 0.5)
    assert fam.schedules[1].thresholds == (0.5, 0.8)
    with pytest.raises(ConfigurationError):
        load_schedule_family(str(tmp_path / "nope.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        load_schedule_family(str(bad))


def test_policy_spec_validation_and_descriptor():
    with pytest.raises(InvalidParameterError):
        PolicySpec(kind="nope", x=0.5)
    with pytest.raises(InvalidParameterError):
        PolicySpec(kind="sec", x=1.5)
    spec = PolicySpec(kind="rpi", x=0.4)
    assert spec.descriptor() == {"kind": "rpi", "x": 0.4, "schedule": "single-threshold"}
    assert PolicySpec(kind="sop", x=0.4).descriptor() == {"kind": "sop", "x": 0.4}


def accepted_positions(kind, x, order, values, family=None):
    inst = Instance(values=values)
    spec = PolicySpec(kind=kind, x=x, family=family)
    out = run_two_phase(inst, ArrivalOrder(sigma=order), spec.build(inst.n))
    return out.accepted_positions


VALS4 = (4.0, 3.0, 2.0, 1.0)
VALS6 = (6.0, 5.0, 4.0, 3.0, 2.0, 1.0)


def test_sec_accepts_first_record_after_window():
    # window m=1: position 1 observed, first later record taken, Phase 2 idle
    assert accepted_positions("sec", 0.5, (2, 0, 3, 1), VALS4) == (2,)
    assert accepted_positions("sec", 0.5, (0, 2, 3, 1), VALS4) == ()
    assert accepted_positions("sec", 1.0, (2, 0, 3, 1), VALS4) == ()


def test_sop_phase2_beats_window_not_records():
    # order: item 3 observed, item 0 accepted in Phase 1; Phase-2 item 1 is
    # not a record (0 was seen) yet beats the window, so sop takes it
    assert accepted_positions("sop", 0.5, (3, 0, 1, 2), VALS4) == (2, 3)
    assert accepted_positions("sec", 0.5, (3, 0, 1, 2), VALS4) == (2,)
    # observing the best item starves both phases
    assert accepted_positions("sop", 0.5, (0, 1, 2, 3), VALS4) == ()


def test_sop_empty_window_takes_first_of_each_phase():
    assert accepted_positions("sop", 0.0, (3, 0, 1, 2), VALS4) == (1, 3)


def test_tps_phase2_ignores_phase1_items():
    # Phase 2 of tps restarts: item 1 is a Phase-2 record even though the
    # better item 0 appeared in Phase 1
    order = (0, 2, 4, 3, 5, 1)  # n=3, window m=2 per phase
    assert accepted_positions("tps", 0.5, order, VALS6) == (6,)
    # wai keeps Phase-1 items on the board, so item 1 is no record there
    assert accepted_positions("wai", 0.5, order, VALS6) == ()


def test_wai_acceptance_examples():
    # n=3, m=2, Phase-1 record at position 3; Phase 2 finds no further record.
    assert accepted_positions("wai", 0.5, (1, 2, 0, 3, 4, 5), VALS6) == (3,)
    # m=1, early Phase-1 stop at t=2; cutoff max(2, ceil(5/e)) = 2 lets the
    # (nonexistent) Phase-2 records through immediately.
    assert accepted_positions("wai", 0.3, (1, 0, 2, 3, 4, 5), VALS6) == (2,)
    # n=2, m=1: record at position 3 has k=3 > cutoff 2 and is taken.
    assert accepted_positions("wai", 0.5, (0, 1, 2, 3), VALS4) == ()
    assert accepted_positions("wai", 0.5, (1, 2, 0, 3), VALS4) == (3,)


def test_wai_holds_records_until_the_cutoff():
    # n=3, m=0: Phase 1 takes position 1, so t=1 and cutoff ceil(4/e) = 2.
    # The Phase-2 record at k=2 is NOT eligible; only k=3 onward may accept.
    assert accepted_positions("wai", 0.0, (3, 0, 4, 1, 2, 5), VALS6) == (1,)
    # same setup, record repeats at k=3: accepted there
    assert accepted_positions("wai", 0.0, (3, 0, 4, 2, 1, 5), VALS6) == (1, 5)


def test_rpi_table_rank_and_cutoff_interplay():
    # x=0: Phase 1 stops at t=1, so N=3 and the schedules below give
    # count cutoffs (2,3) and (2,2) respectively.
    fam = TableScheduleFamily([0.0], [[0.5, 0.75]])
    fam2 = TableScheduleFamily([0.0], [[0.5, 0.5]])
    # rank 1 at k=2 must wait; the later record at k=3 fires
    assert accepted_positions("rpi", 0.0, (1, 2, 3, 0), VALS4, family=fam) == (1, 4)
    # rank 2 fires at k=3 once its cutoff is 2
    assert accepted_positions("rpi", 0.0, (2, 3, 0, 1), VALS4, family=fam2) == (1, 4)
    # but with cutoff 3 the same rank-2 arrival is refused for good
    assert accepted_positions("rpi", 0.0, (2, 3, 0, 1), VALS4, family=fam) == (1,)


def test_policies_are_value_oblivious():
    rng = random.Random(11)
    fam = TableScheduleFamily([0.0, 0.4], [[0.4], [0.5, 0.8]])
    alt = (9.0, 2.5, 2.0, 0.5, 0.25, 0.125)
    for _ in range(40):
        order = tuple(rng.sample(range(6), 6))
        for kind in ("sec", "sop", "tps", "wai", "rpi"):
            for x in (0.0, 0.3, 0.7, 1.0):
                family = fam if kind == "rpi" else None
                a = accepted_positions(kind, x, order, VALS6, family=family)
                b = accepted_positions(kind, x, order, alt, family=family)
                assert a == b, (kind, x, order)


def test_policy_state_not_reused_between_runs():
    spec = PolicySpec(kind="wai", x=0.5)
    inst = dirac_instance(2)
    order = ArrivalOrder(sigma=(1, 2, 0, 3))
    first = run_two_phase(inst, order, spec.build(2)).accepted_positions
    policy = spec.build(2)
    run_two_phase(inst, order, policy)
    again = run_two_phase(inst, ArrivalOrder(sigma=(0, 1, 2, 3)), spec.build(2)).accepted_positions
    assert first == (3,)
    assert again == ()
