#!/usr/bin/env python3
"""
Sweep tests: grid construction, figure catalog, parallel determinism, audits
"""

import math
import sys

import numpy as np
import pytest

from modules.core.errors import InvalidSpec, UnknownFigure
from modules.core.flows import nonreciprocity_contrast
from modules.core.types import ChannelSpec, NodeSpec
from modules.sweep import (
    FIGURE_IDS,
    SweepSpec,
    audited_records,
    conservation_audit,
    flow_columns,
    reproduce_figure,
    resolve_threads,
    run_sweep,
)
from modules.sweep.grid import THREADS_ENV

LOSSLESS_FAMILIES = ("fig5", "fig6", "fig8", "fig9", "fig10")


def _nearest(records, target):
    return min(records, key=lambda record: abs(record.value - target))


# ============================================================
# Sweep spec
# ============================================================

def test_k_grid_avoids_band_edges(two_channels):
    spec = SweepSpec(NodeSpec.two_port(), two_channels, "k", 0.0, math.pi, steps=4)
    np.testing.assert_allclose(spec.grid(), [(i + 0.5) * math.pi / 4 for i in range(4)])


def test_detuning_grid_is_inclusive(two_channels):
    spec = SweepSpec(NodeSpec.two_port(), two_channels, "delta1", -4.0, 4.0, steps=5, k=1.0)
    np.testing.assert_allclose(spec.grid(), [-4.0, -2.0, 0.0, 2.0, 4.0])


@pytest.mark.parametrize("kwargs", [
    {"variable": "k", "lo": 0.0, "hi": math.pi, "steps": 1},
    {"variable": "k", "lo": 1.0, "hi": 1.0},
    {"variable": "k", "lo": 0.0, "hi": 4.0},
    {"variable": "delta1", "lo": -1.0, "hi": 1.0},
    {"variable": "delta3", "lo": -1.0, "hi": 1.0, "k": 1.0},
    {"variable": "coupling", "lo": 0.0, "hi": 1.0, "k": 1.0, "edge": ("c", "d1")},
    {"variable": "gamma", "lo": 0.0, "hi": 1.0, "k": 1.0},
    {"variable": "k", "lo": 0.0, "hi": math.pi, "backend": "lattice"},
    {"variable": "k", "lo": 0.0, "hi": math.pi, "incident": "c"},
    {"variable": "k", "lo": 0.0, "hi": math.pi, "derived_rules": ("delta3_tracks_delta2",)},
])


def test_invalid_specs(two_channels, kwargs):
    with pytest.raises(InvalidSpec):
        SweepSpec(NodeSpec.two_port(), two_channels, **kwargs)


def test_rule_conflicts_with_swept_variable():
    node = NodeSpec.circulator_three_modes()
    channels = (ChannelSpec("a"), ChannelSpec("b"), ChannelSpec("c"))
    with pytest.raises(InvalidSpec, match="derived rule"):
        SweepSpec(node, channels, "delta3", -1.0, 1.0, k=1.0, derived_rules=("delta3_tracks_delta2",))
    with pytest.raises(InvalidSpec):
        SweepSpec(node, channels, "k", 0.0, math.pi, derived_rules=("gamma_from_j2",))


def test_coupling_sweep_point(two_channels):
    spec = SweepSpec(NodeSpec.two_port(), two_channels, "coupling", 0.0, 2.0, k=1.0, edge=("b", "d2"))
    node, k = spec.point(1.5)
    assert node.coupling("b", "d2") == 1.5
    assert k == 1.0
    assert spec.describe()["variable"] == "J_b2"


def test_flow_columns():
    assert flow_columns(("a", "b")) == ["I_aa", "I_ab", "I_ba", "I_bb"]
    assert len(flow_columns()) == 9


# ============================================================
# Figure catalog
# ============================================================

def test_catalog():
    assert len(FIGURE_IDS) == 38
    assert FIGURE_IDS[0] == "fig2a"
    assert FIGURE_IDS[-1] == "fig10f"
    with pytest.raises(UnknownFigure):
        reproduce_figure("fig4a")


def test_converter_binding():
    spec = reproduce_figure("fig2c")
    node, _ = spec.point(0.25 * math.pi)
    assert node.coupling("a", "d2") == 4.0
    assert node.mode("d2").gamma == pytest.approx(math.sqrt(514.0))
    assert node.phi == pytest.approx(0.5 * math.pi)
    assert spec.steps == 512


def test_converter_detuning_keeps_damping():
    spec = reproduce_figure("fig3b")
    node, k = spec.point(1.0)
    assert node.mode("d2").delta == 1.0
    assert node.mode("d2").gamma == pytest.approx(math.sqrt(514.0))
    assert k == pytest.approx(0.25 * math.pi)


def test_two_mode_detuning_binding():
    spec = reproduce_figure("fig6a")
    assert spec.variable == "delta1"
    assert spec.k == pytest.approx(0.25 * math.pi)
    assert spec.incident == "a"
    assert spec.channels[2].xi == pytest.approx(1.2396773773849388, rel=1e-12)


def test_three_mode_detuning_rule():
    spec = reproduce_figure("fig9e")
    node, _ = spec.point(-1.0)
    assert node.mode("d3").delta == node.mode("d2").delta == -1.0
    assert spec.incident == "b"


def test_tunable_binding():
    spec = reproduce_figure("fig10a", steps=64)
    assert spec.steps == 64
    assert "J_a1=" in spec.bindings[0]
    assert spec.channels[2].xi == pytest.approx(1.3713668475, abs=1e-9)


def test_custom_delta_range():
    spec = reproduce_figure("fig6d", steps=16, delta_range=(-2.0, 2.0))
    assert (spec.lo, spec.hi) == (-2.0, 2.0)
    assert spec.variable == "delta2"


# ============================================================
# Run sweep
# ============================================================

def test_converter_direction_flips():
    records = run_sweep(reproduce_figure("fig2a"), max_workers=2)
    near_quarter = _nearest(records, 0.25 * math.pi)
    near_mirror = _nearest(records, 0.75 * math.pi)
    assert nonreciprocity_contrast(near_quarter.flows, 0, 1) > 15.0
    assert nonreciprocity_contrast(near_mirror.flows, 0, 1) < -15.0


def test_thread_count_does_not_change_results():
    spec = reproduce_figure("fig8a", steps=64)
    serial = run_sweep(spec, max_workers=1)
    parallel = run_sweep(spec, max_workers=4)
    assert [r.index for r in parallel] == list(range(64))
    for first, second in zip(serial, parallel):
        assert first.value == second.value
        assert first.status == second.status
        np.testing.assert_array_equal(first.flows, second.flows)


def test_beam_splitter_record():
    records = run_sweep(reproduce_figure("fig9a"), max_workers=2)
    record = _nearest(records, -math.sqrt(3.0))
    assert record.index == 145
    for out in ("a", "b", "c"):
        assert record.flow(out, "a") == pytest.approx(1.0 / 3.0, abs=5e-2)


def test_detuned_two_mode_record():
    records = run_sweep(reproduce_figure("fig6a"), max_workers=2)
    record = _nearest(records, -2.0 * math.sqrt(2.0))
    assert record.index == 75
    assert record.flow("b", "a") == pytest.approx(0.25, abs=2e-2)


def test_closed_side_channel_is_marked(two_mode_design):
    channels = (ChannelSpec("a"), ChannelSpec("b"), ChannelSpec("c", 0.5))
    spec = SweepSpec(two_mode_design.to_node(), channels, "k", 0.0, math.pi, steps=128, incident="a")
    records = run_sweep(spec, max_workers=2)
    closed = [r for r in records if r.status == "closed:c"]
    assert closed
    assert all(r.flow("c", "a") == 0.0 for r in closed)
    assert all(np.isnan(r.flow("a", "c")) for r in closed)
    assert conservation_audit(records) == []


@pytest.mark.parametrize("figure_id", [f for f in FIGURE_IDS if f.startswith(LOSSLESS_FAMILIES)])
def test_lossless_figures_conserve(figure_id):
    records = run_sweep(reproduce_figure(figure_id, steps=128), max_workers=2)
    assert conservation_audit(records) == []


def test_audit_skips_skipped_points(two_channels):
    node = NodeSpec.two_port(delta2=0.5)
    spec = SweepSpec(node, two_channels, "delta1", -1.0, 1.0, steps=3, k=0.5 * math.pi)
    records = run_sweep(spec, max_workers=1)
    # the middle point puts delta1 on E = 0
    assert records[1].status == "pole"
    assert records[1].skipped
    assert np.isnan(records[1].flows).all()
    assert conservation_audit(records) == []



def test_derived_damping_is_not_audited():
    spec = reproduce_figure("fig2c", steps=32)
    # damping comes from the gamma_from_j2 rule, not the base node
    assert spec.node.is_lossless
    records = run_sweep(spec, max_workers=2)
    assert not any(record.lossless for record in records)
    assert max(r.conservation_residual for r in records if not r.skipped) > 1e-3
    assert conservation_audit(records) == []
    assert audited_records(records) == 0


def test_lossless_records_are_counted():
    records = run_sweep(reproduce_figure("fig5a", steps=32), max_workers=2)
    assert all(record.lossless for record in records)
    assert audited_records(records) == sum(1 for r in records if not r.skipped) > 0


# ============================================================
# Threads
# ============================================================

def test_environment_overrides(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_threads(8) == 3


def test_config_value_and_default(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_threads(5) == 5
    assert resolve_threads(0) >= 1


def test_invalid_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(InvalidSpec):
        resolve_threads()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
