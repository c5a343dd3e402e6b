import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermilength.bench import (
    DEFAULT_THRESHOLD,
    REPORT_SCHEMA,
    BenchmarkConfig,
    ConfigError,
    determine_lstar,
    error_score,
    measure_length,
    passes,
    run_sweep,
)
from fermilength.mitigation import CalibrationSet
from fermilength.vqe import preoptimize


class TestScore:
    def test_formula(self):
        assert error_score(-1.1, -1.0, 2, 100) == pytest.approx(0.1 / 20)
        assert error_score(-0.9, -1.0, 2, 100) == pytest.approx(error_score(-1.1, -1.0, 2, 100))

    @given(st.floats(-5, 5), st.integers(2, 40), st.integers(1, 10**6))
    def test_nonnegative_and_zero_at_exact(self, e, L, M):
        assert error_score(e, e, L, M) == 0.0
        assert error_score(e + 0.1, e, L, M) > 0

    @given(st.floats(0.001, 1), st.integers(2, 20))
    def test_four_times_shots_halves_score(self, err, L):
        assert error_score(err, 0, L, 4000) == pytest.approx(error_score(err, 0, L, 1000) / 2)

    @pytest.mark.parametrize("L,M", [(1, 10), (2, 0)])
    def test_rejects(self, L, M):
        with pytest.raises(ValueError):
            error_score(0.0, 0.0, L, M)

    def test_pass_rule(self):
        assert passes(1e-3, 1e-3)
        assert not passes(1.0001e-3, 1e-3)
        assert not passes(0.0, 0.0)


class TestLstar:
    @pytest.mark.parametrize("flags,expected", [
        ([True, True, False, True], 3),
        ([False, True, True], 0),
        ([True] * 11, 12),
        ([], 0),
    ])
    def test_first_failure_rule(self, flags, expected):
        assert determine_lstar(flags) == expected

    def test_offset_start(self):
        assert determine_lstar([True, True, False], L_min=5) == 6

    @given(st.lists(st.booleans(), max_size=15))
    def test_prefix_property(self, flags):
        lstar = determine_lstar(flags)
        k = lstar - 1 if lstar else 0
        assert all(flags[:k])
        assert k == len(flags) or not flags[k]


class TestConfig:
    @pytest.mark.parametrize("field,value", [
        ("L_min", 1), ("L_max", 1), ("shots", 0), ("threshold", -1e-3), ("threshold", math.nan),
        ("p10", 1.5), ("p2", -0.1), ("trajectories", 0), ("calibration_shots", 0), ("U", math.inf),
    ])
    def test_invalid_names_field(self, field, value):
        cfg = BenchmarkConfig(**{field: value})
        with pytest.raises(ConfigError) as info:
            cfg.validate()
        assert info.value.field == field

    def test_zero_threshold_accepted(self):
        BenchmarkConfig(threshold=0.0).validate()

    def test_text_round_trip(self):
        cfg = BenchmarkConfig(L_max=7, shots=4096, threshold=2e-3, mitigation=False, calibration_shots=100)
        assert BenchmarkConfig.from_text(cfg.to_text()) == cfg

    def test_comments_and_defaults(self):
        cfg = BenchmarkConfig.from_text("# sweep\nL_max = 5  # short\n\nmitigation = off\n")
        assert cfg.L_max == 5 and cfg.mitigation is False and cfg.shots == 8192

    @pytest.mark.parametrize("text,field", [("bogus = 1", "bogus"), ("shots = many", "shots"),
                                            ("L_max 5", "line 1")])
    def test_parse_errors(self, text, field):
        with pytest.raises(ConfigError) as info:
            BenchmarkConfig.from_text(text)
        assert info.value.field == field


def noiseless(**kw):
    return BenchmarkConfig(p10=0.0, p01=0.0, p2=0.0, **kw)


class TestSweep:
    def test_noiseless_reaches_lmax(self):
        rep = run_sweep(noiseless(L_max=5))
        assert [r.L for r in rep.results] == [2, 3, 4, 5]
        assert rep.lstar_raw == 5 and rep.lstar_mitigated == 5
        assert rep.nstar_raw == 10
        assert rep.termination_mitigated == "reached L_max=5"
        for r in rep.results:
            assert r.N == 2 * r.L
            assert abs(r.raw_energy - r.exact_energy) < 5 * r.raw_std_error
            assert r.mitigated_energy == pytest.approx(r.raw_energy, abs=1e-12)

    def test_zero_threshold_fails_first_length(self):
        rep = run_sweep(noiseless(L_max=4, threshold=0.0))
        assert rep.lstar_raw == 0 and rep.lstar_mitigated == 0 and rep.nstar_mitigated == 0
        assert len(rep.results) == 1
        assert rep.termination_mitigated == "threshold exceeded at L=2"
        assert "NON-DEFAULT THRESHOLD" in rep.to_dict()["notes"][0]

    def test_mitigation_toggle_leaves_raw_track(self):
        base = dict(L_max=3, p10=0.03, p01=0.03, p2=0.0)
        on = run_sweep(BenchmarkConfig(**base))
        off = run_sweep(BenchmarkConfig(mitigation=False, **base))
        assert [r.raw_energy for r in on.results] == [r.raw_energy for r in off.results]
        assert off.lstar_mitigated is None and off.nstar_mitigated is None
        assert all(r.mitigated_energy is None for r in off.results)
        assert "mitigated_energy" in off.to_csv().splitlines()[0]

    def test_rerun_is_byte_identical(self):
        cfg = BenchmarkConfig(L_max=3, shots=2048, seed=4)
        assert run_sweep(cfg).to_csv() == run_sweep(BenchmarkConfig(L_max=3, shots=2048, seed=4)).to_csv()

    def test_seed_changes_estimates(self):
        a = run_sweep(BenchmarkConfig(L_max=2, seed=1)).results[0].raw_energy
        b = run_sweep(BenchmarkConfig(L_max=2, seed=2)).results[0].raw_energy
        assert a != b

    def test_report_shape(self):
        rep = run_sweep(noiseless(L_max=3))
        d = json.loads(rep.to_json())
        assert d["schema"] == REPORT_SCHEMA
        assert d["notes"] == []
        assert d["config"]["threshold"] == DEFAULT_THRESHOLD
        assert d["N_star_mitigated"] == 6
        assert len(d["results"]) == 2
        csv_rows = rep.to_csv().splitlines()
        assert csv_rows[0] == "N,raw_energy,mitigated_energy,exact_energy,raw_score,mitigated_score"
        assert len(csv_rows) == 3

    def test_primary_is_raw_without_mitigation(self):
        # readout bias at 5% fails the raw track early under a tight threshold
        cfg = BenchmarkConfig(L_max=6, p10=0.05, p01=0.05, p2=0.0, mitigation=False,
                              shots=1 << 16, threshold=2e-4)
        rep = run_sweep(cfg)
        assert rep.lstar_raw < 6
        passed = rep.lstar_raw - 1 if rep.lstar_raw else 0
        assert len(rep.results) == passed + 1
        assert rep.termination_raw.startswith("threshold exceeded")


class TestMeasureLength:
    def test_skips_mitigation_beyond_limit(self):
        params, _, _ = preoptimize(14)
        raw, mit, note = measure_length(14, params, BenchmarkConfig(shots=64, p2=0.0))
        assert mit is None and "exceeds" in note
        assert math.isfinite(raw.value)

    def test_uses_supplied_calibration(self):
        params, _, _ = preoptimize(3)
        cal = CalibrationSet.from_rates([(0.01, 0.02)] * 10)
        _, mit, note = measure_length(3, params, BenchmarkConfig(shots=1024), cal)
        assert mit is not None and "file" in note
