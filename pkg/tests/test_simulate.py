from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from tdsentropy.core import AttributeSet, expand_dominance, validate_dataset
from tdsentropy.errors import DomainError, NoDataError
from tdsentropy.estimators import entropy_curve, plugin_entropy
from tdsentropy.simulate import (
    LAG_CLAMP,
    Phase,
    SimulatorConfig,
    default_config,
    dump_config,
    empirical_truth,
    generate_panel,
    load_config,
    sample_measurement,
)

from conftest import EIGHT

ROOT = Path(__file__).resolve().parents[1]


def config(**kw):
    base = dict(attributes=AttributeSet(EIGHT),
                phases=[Phase(0.0, 1.0, [1] * 8)], seed=1)
    base.update(kw)
    return SimulatorConfig(**base)


THREE_PHASE = dict(
    phases=[Phase(0.0, 0.3, [6, 2, 1, 0, 0, 0, 0, 0]),
            Phase(0.3, 0.7, [1, 2, 3, 4, 4, 3, 2, 1]),
            Phase(0.7, 1.0, [0, 0, 0, 1, 0, 2, 1, 5])],
    duration_mean_s=20.0, duration_sd_s=0.0, lag_mean_s=0.5, lag_sd_s=0.2,
    dwell_mean_s=0.25)


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(phases=[Phase(0.0, 0.5, [1] * 8)]),
        dict(phases=[Phase(0.0, 0.5, [1] * 8), Phase(0.6, 1.0, [1] * 8)]),
        dict(phases=[Phase(0.0, 1.0, [0] * 8)]),
        dict(phases=[Phase(0.0, 1.0, [1] * 7)]),
        dict(phases=[Phase(0.0, 1.0, [1, -1, 1, 1, 1, 1, 1, 1])]),
        dict(duration_mean_s=0.0),
        dict(lag_sd_s=-1.0),
        dict(lag_mean_s=-0.5),
        dict(dwell_mean_s=0.0),
        dict(n_p=0),
    ])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            config(**kw)

    def test_default_file(self):
        c = default_config()
        assert (c.n_p, c.n_r, len(c.attributes)) == (10, 3, 8)
        assert (c.duration_mean_s, c.duration_sd_s) == (40.8, 9.7)
        assert (c.lag_mean_s, c.lag_sd_s) == (3.4, 2.3)
        assert c.dwell_mean_s == 4.0 and c.seed == 42
        assert [(p.start, p.end) for p in c.phases] == [(0.0, 0.2), (0.2, 0.7),
                                                        (0.7, 1.0)]
        shipped = (ROOT / "configs" / "master-curve.default").read_text()
        assert load_config(shipped) == c

    def test_dump_round_trip(self):
        c = config(**THREE_PHASE)
        assert load_config(dump_config(c)) == c

    def test_load_errors(self):
        with pytest.raises(DomainError, match="missing"):
            load_config("attributes: [a, b]\n")
        with pytest.raises(DomainError, match="unknown"):
            load_config(dump_config(config()) + "colour: red\n")


class TestSampleMeasurement:
    def test_degenerate(self):
        c = config(duration_sd_s=0.0, lag_mean_s=0.0, lag_sd_s=0.0,
                   dwell_mean_s=1e9)
        m = sample_measurement(c, "p1", 1, "s")
        assert m.swallow_s == c.duration_mean_s
        assert len(m.events) == 1 and m.events[0].onset_s == 0.0

    def test_deterministic(self):
        c = default_config()
        assert sample_measurement(c, "p1", 2, "gel") == \
            sample_measurement(c, "p1", 2, "gel")

    def test_lag_clamped(self):
        c = config(duration_mean_s=10.0, duration_sd_s=0.0, lag_mean_s=50.0,
                   lag_sd_s=0.0)
        m = sample_measurement(c, "p1", 1, "s")
        assert m.events[0].onset_s == LAG_CLAMP * 10.0

    def test_single_attribute_weight_collapses(self):
        c = config(phases=[Phase(0.0, 1.0, [1] + [0] * 7)], dwell_mean_s=0.5)
        m = sample_measurement(c, "p1", 1, "s")
        assert [e.attribute_idx for e in m.events] == [0]

    def test_invariants_hold(self):
        c = default_config()
        for rep in range(1, 20):
            m = sample_measurement(c, "p9", rep, "x")
            onsets = [e.onset_s for e in m.events]
            assert all(b > a for a, b in zip(onsets, onsets[1:]))
            assert all(0 <= t <= m.swallow_s for t in onsets)
            attrs = [e.attribute_idx for e in m.events]
            assert all(a != b for a, b in zip(attrs, attrs[1:]))

    def test_stream_independence(self):
        c = default_config()
        a = sample_measurement(c, "p1", 1, "s")
        b = sample_measurement(c, "p1", 2, "s")
        assert a != b
        # other ids are untouched by generating more panelists
        small = generate_panel(replace(c, n_p=2), "s").measurements
        big = generate_panel(replace(c, n_p=5), "s").measurements
        assert big[:len(small)] == small

    def test_zero_weight_never_drawn(self):
        c = config(phases=[Phase(0.0, 1.0, [0.1] * 7 + [0.0])], dwell_mean_s=0.2)
        for rep in range(1, 30):
            m = sample_measurement(c, "p1", rep, "s")
            assert all(e.attribute_idx != 7 for e in m.events)


class TestGeneratePanel:
    @pytest.mark.parametrize("n_p, n_r", [(10, 3), (12, 4)])
    def test_sizes(self, n_p, n_r):
        ds = generate_panel(replace(default_config(), n_p=n_p, n_r=n_r), "s")
        assert len(ds.measurements) == n_p * n_r
        assert ds.n_p == n_p
        assert validate_dataset(ds).errors == []

    def test_seeds(self):
        c = default_config()
        assert generate_panel(c, "s") == generate_panel(c, "s")
        assert generate_panel(c, "s") != generate_panel(replace(c, seed=43), "s")


class TestEmpiricalTruth:
    def test_deterministic_attribute(self):
        c = config(phases=[Phase(0.0, 1.0, [1] + [0] * 7)], lag_mean_s=0.0,
                   lag_sd_s=0.0)
        for tau in (0, 37, 100):
            assert list(empirical_truth(c, tau, 200)) == [1.0] + [0.0] * 7

    def test_symmetry(self):
        c = SimulatorConfig(AttributeSet(["a", "b"]), [Phase(0.0, 1.0, [1, 1])],
                            lag_mean_s=0.0, lag_sd_s=0.0, seed=3)
        p = empirical_truth(c, 50, 100_000)
        assert np.all(np.abs(p - 0.5) < 0.01)

    def test_middle_phase(self):
        c = config(**THREE_PHASE)
        n_mc = 100_000
        p = empirical_truth(c, 50, n_mc)
        q = c.phases[1].probabilities
        se = np.sqrt(q * (1 - q) / n_mc)
        assert np.all(np.abs(p - q) <= 3 * se)

    def test_no_data(self):
        c = config(lag_mean_s=1000.0, lag_sd_s=0.0, duration_sd_s=0.0)
        with pytest.raises(NoDataError):
            empirical_truth(c, 10, 50)

    def test_disjoint_from_panel_stream(self):
        c = default_config()
        assert not np.array_equal(empirical_truth(c, 50, 30),
                                  empirical_truth(replace(c, seed=7), 50, 30))


def test_large_panel_convergence():
    c = replace(config(**THREE_PHASE), n_r=1)
    truth = plugin_entropy(empirical_truth(c, 50, 100_000), 8)
    errors = []
    for n_p in (20, 2000):
        grid = expand_dominance(generate_panel(replace(c, n_p=n_p), "s"), "s")
        h = entropy_curve(grid, "plugin", "active").points[50].value
        errors.append(abs(h - truth))
    assert errors[1] < 0.01
    assert errors[1] < errors[0]


def test_master_curve_shape():
    curve = entropy_curve(expand_dominance(generate_panel(default_config(), "s"),
                                           "s"))
    h = curve.values
    assert h[10] < h[50]
    assert h[30:71].max() > h[90]
    assert 0 < h[100] < 1
