"""Tests for the two-oscillator compiler and its staging invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscsynth.fockspace import QUBIT_G, make_space
from oscsynth.gates import DispersiveModel, selective_drive_frequency
from oscsynth.multiosc import (
    TwoOscSchedule,
    annotate_frequencies,
    ftp_two_oscillator,
    intermediate_states,
    invert_two_oscillator,
)
from oscsynth.planner import multi_punch_card, two_oscillator_plan
from oscsynth.synthesis import CouplingBudget, replay_fidelity, schedule_from_json, schedule_to_json
from oscsynth.targets import TargetState, multimode_target

TWO_PI = 2 * math.pi


def random_two_osc_target(rng, L1, L2):
    amps = rng.normal(size=(L1 + 1, L2 + 1)) + 1j * rng.normal(size=(L1 + 1, L2 + 1))
    amps[L1, L2] += 1.0
    return TargetState(amps)


def test_noon_state_round_trip():
    sp = make_space([8, 8])
    target = multimode_target(sp, "noon", N=2)
    sched = invert_two_oscillator(target, (2, 2))
    assert sched.fidelity == pytest.approx(1.0, abs=1e-9)
    # one kill (drive + swap) per occupied non-origin lattice site
    assert len(sched.steps) == 4


def test_lattice_violation_rejected():
    amps = np.zeros((6, 6))
    amps[0, 0] = amps[3, 2] = 1.0
    with pytest.raises(ValueError):
        invert_two_oscillator(TargetState(amps), (2, 2))


def test_bell_cat_round_trip():
    sp = make_space([12, 12])
    target = multimode_target(sp, "bell_cat", alpha1=1.2, alpha2=1.2, truncate_at=6)
    sched = ftp_two_oscillator(target, (1, 1))
    assert sched.fidelity == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=12, deadline=None)
@given(
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=1, max_value=2),
    st.integers(min_value=1, max_value=2),
    st.integers(min_value=0, max_value=10**6),
)
def test_random_targets_replay_exactly(L1, L2, n1, n2, seed):
    rng = np.random.default_rng(seed)
    target = random_two_osc_target(rng, L1, L2)
    sched = ftp_two_oscillator(target, (n1, n2))
    assert replay_fidelity(sched, target, semantics="ideal-pair") == pytest.approx(
        1.0, abs=1e-8
    )


def test_step_count_matches_planner():
    sp = make_space([8, 8])
    target = multimode_target(sp, "dense", L1=2, L2=2)
    sched = ftp_two_oscillator(target, (2, 2))
    steps, _ = two_oscillator_plan(target, (2, 2), CouplingBudget())
    # each planner step is one (selective drive, swap) pulse pair
    assert len(sched.steps) == 2 * steps
    card = multi_punch_card(target, (2, 2))
    assert steps == card.total_steps


def test_forward_replay_builds_oscillator_one_first():
    # for a lattice-symmetric target the second oscillator must stay in its
    # base column until every oscillator-1 level is populated
    sp = make_space([8, 8])
    amps = np.zeros((6, 6))
    amps[0, 0] = amps[2, 0] = amps[4, 0] = 1.0
    amps[0, 2] = amps[2, 2] = 0.7
    target = TargetState(amps)
    sched = invert_two_oscillator(target, (2, 2))
    states = intermediate_states(sched)
    space = sched.space
    d1, d2 = space.osc_cutoffs

    def osc2_weight_above_base(state):
        w = 0.0
        for q in (0, 1):
            for l1 in range(d1):
                for l2 in range(2, d2):
                    w += abs(state[space.index(q, l1, l2)]) ** 2
        return w

    weights = [osc2_weight_above_base(s) for s in states]
    # once oscillator 2 leaves the base column it never returns
    first = next(i for i, w in enumerate(weights) if w > 1e-9)
    assert all(w < 1e-9 for w in weights[:first])
    # and every oscillator-1 kill happens before that point
    osc1_steps = [i for i, s in enumerate(sched.steps)
                  if s.kind == "njc" and s.osc_index == 0]
    assert max(osc1_steps) < first


def test_intermediate_states_stay_normalized():
    rng = np.random.default_rng(5)
    target = random_two_osc_target(rng, 2, 2)
    sched = ftp_two_oscillator(target, (1, 2))
    for s in intermediate_states(sched):
        assert np.linalg.norm(s) == pytest.approx(1.0, abs=1e-10)


def test_two_oscillator_json_round_trip():
    sp = make_space([8, 8])
    target = multimode_target(sp, "dense", L1=2, L2=1)
    sched = ftp_two_oscillator(target, (2, 2), budget=CouplingBudget())
    back = schedule_from_json(schedule_to_json(sched))
    assert replay_fidelity(back, target, semantics="ideal-pair") == pytest.approx(
        1.0, abs=1e-8
    )


def test_annotate_frequencies():
    sp = make_space([8, 8])
    target = multimode_target(sp, "dense", L1=1, L2=1)
    sched = ftp_two_oscillator(target, (1, 1))
    m1 = DispersiveModel(order=1, omega_q=TWO_PI * 10e9, omega_o=TWO_PI * 5e9,
                         g=TWO_PI * 30e6)
    m2 = DispersiveModel(order=1, omega_q=TWO_PI * 10e9, omega_o=TWO_PI * 4.8e9,
                         g=TWO_PI * 30e6)
    out = annotate_frequencies(sched, (m1, m2))
    freqs = out.meta["drive_freqs_radps"]
    assert len(freqs) == len(sched.steps)
    for step, f in zip(sched.steps, freqs):
        if step.kind != "drive":
            assert f is None
        elif step.selectivity is None:
            assert f == pytest.approx(m1.omega_q)
        else:
            assert f == pytest.approx(selective_drive_frequency([m1, m2], step.selectivity))
    with pytest.raises(ValueError):
        annotate_frequencies(sched, (m1,))
