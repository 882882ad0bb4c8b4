import json
import math
from dataclasses import replace

import numpy as np
import pytest

from gasrotor.bearing import HGJBGeometry, OperatingPoint
from gasrotor.errors import InvariantError, SingularSystemError
from gasrotor.features import FEATURE_NAMES, evaluate_feature_vector, featureize
from gasrotor.rotor import mass_properties, parse_rotor
from gasrotor.rotordyn import ModeStabilityResult
from gasrotor.sweep import (DesignPerformance, OracleEvaluator, SweepSpec,
                            ToleranceSpec, default_speeds, design_digest,
                            export_contours, feasible_fraction, parse_contours,
                            run_sweep)

# Frozen regression values of the reference feature vector.
REFERENCE_FEATURES = [0.5, 0.7766761222884493, 0.8, 2.0, 1.5,
                      1.1393438903804824, 0.34087611553950947,
                      0.12296949057401388, 0.07779065873204619,
                      -0.5861901681759379, 0.41380983182406206]


class TestFeatureize:
    def test_reference_vector_frozen(self, example_rotor, reference_geometry,
                                     reference_operating):
        x = featureize(example_rotor, reference_geometry, reference_operating)
        assert np.allclose(x, REFERENCE_FEATURES, rtol=1e-12, atol=0)

    def test_symmetric_rotor_offsets(self):
        doc = {"format_version": 1, "elements": [
            {"L_m": 0.01, "layers": [{"d_m": 0.0, "D_m": 0.01, "rho_kg_m3": 8000}]},
            {"L_m": 0.01, "layers": [{"d_m": 0.0, "D_m": 0.01, "rho_kg_m3": 8000}]}],
            "journal_a": 0, "journal_b": 1}
        rotor = parse_rotor(json.dumps(doc))
        geom = HGJBGeometry(alpha=0.5, beta=2.44, gamma=0.8, h_g=1e-5, h_r=1e-5,
                            L=0.01, D=0.01)
        op = OperatingPoint(fluid="air", p_a=1e5, T=293.15, N=50000.0)
        x = featureize(rotor, geom, op)
        assert x[FEATURE_NAMES.index("z1_bar")] == pytest.approx(-0.5, rel=1e-12)
        assert x[FEATURE_NAMES.index("z2_bar")] == pytest.approx(0.5, rel=1e-12)

    def test_speed_scaling(self, example_rotor, reference_geometry, reference_operating):
        x1 = featureize(example_rotor, reference_geometry, reference_operating)
        x2 = featureize(example_rotor, reference_geometry,
                        replace(reference_operating, N=2 * reference_operating.N))
        i_lam, i_m = FEATURE_NAMES.index("Lambda"), FEATURE_NAMES.index("m_bar")
        assert x2[i_lam] == pytest.approx(2 * x1[i_lam], rel=1e-12)
        assert x2[i_m] == pytest.approx(4 * x1[i_m], rel=1e-12)

    def test_zero_speed_rejected(self, example_rotor, reference_geometry,
                                 reference_operating):
        with pytest.raises(InvariantError):
            featureize(example_rotor, reference_geometry,
                       replace(reference_operating, N=0.0))

    def test_feature_oracle_matches_dimensional_path(self, example_rotor,
                                                     reference_geometry,
                                                     reference_operating):
        mp = mass_properties(example_rotor)
        dimensional = OracleEvaluator(grid_n=101).evaluate(
            mp, reference_geometry, reference_operating)
        x = featureize(example_rotor, reference_geometry, reference_operating)
        dimensionless = evaluate_feature_vector(x, grid_n=101)
        for a, b in zip(dimensional.modes, dimensionless):
            assert a.excited == b.excited
            if a.excited:
                assert a.whirl_speed_ratio == pytest.approx(b.whirl_speed_ratio,
                                                            abs=1e-9)
                assert a.log_dec == pytest.approx(b.log_dec, rel=1e-9)


def _mode(delta):
    return ModeStabilityResult(mode_id=1, excited=True, stable=delta > 0,
                               whirl_speed_ratio=0.5, log_dec=delta)


def _quiet_modes():
    return tuple(ModeStabilityResult(mode_id=m, excited=False, stable=None,
                                     whirl_speed_ratio=None, log_dec=None)
                 for m in (2, 3, 4))


class ConstantEvaluator:
    """Toy evaluator with a externally prescribed log decrement function."""

    name = "toy"

    def __init__(self, delta_fn):
        self.delta_fn = delta_fn

    def evaluate(self, mp, geom, op):
        delta = self.delta_fn(geom, op)
        return DesignPerformance(modes=(_mode(delta),) + _quiet_modes(),
                                 power_loss_w=1.0, load_capacity_n=2.0)


class TestRunSweep:
    def test_constant_stable_fully_feasible(self, example_rotor, reference_geometry,
                                            reference_operating):
        spec = SweepSpec(speeds=(40000.0,), tolerance=ToleranceSpec(1e-6, 1e-6, 5),
                         evaluator="oracle")
        fmap = run_sweep(example_rotor, reference_geometry, reference_operating,
                         spec, ConstantEvaluator(lambda g, o: 1.0))
        assert fmap.feasible.all() and fmap.valid.all()
        assert feasible_fraction(fmap) == 1.0
        assert np.all(fmap.worst_log_dec == 1.0)

    def test_constant_unstable_nothing_feasible(self, example_rotor,
                                                reference_geometry,
                                                reference_operating):
        spec = SweepSpec(speeds=(40000.0,), tolerance=ToleranceSpec(1e-6, 1e-6, 5),
                         evaluator="oracle")
        fmap = run_sweep(example_rotor, reference_geometry, reference_operating,
                         spec, ConstantEvaluator(lambda g, o: -1.0))
        assert not fmap.feasible.any()
        assert feasible_fraction(fmap) == 0.0

    def test_half_plane_toy_fraction(self, example_rotor, reference_geometry,
                                     reference_operating):
        nominal = reference_geometry.h_r

        def delta(geom, op):
            return -float(np.sign(geom.h_r - nominal))

        spec = SweepSpec(speeds=(40000.0,), tolerance=ToleranceSpec(2e-6, 2e-6, 21),
                         evaluator="oracle")
        fmap = run_sweep(example_rotor, reference_geometry, reference_operating,
                         spec, ConstantEvaluator(delta))
        # delta = 0 on the nominal column counts as unstable: 210 of 441
        assert int((fmap.feasible & fmap.valid).sum()) == 210
        assert feasible_fraction(fmap) == pytest.approx(210.0 / 441.0, rel=1e-12)

    def test_progress_and_order_independence(self, example_rotor, reference_geometry,
                                             reference_operating):
        calls = []
        spec = SweepSpec(speeds=(30000.0, 40000.0),
                         tolerance=ToleranceSpec(1e-6, 1e-6, 3), evaluator="oracle")
        ev = ConstantEvaluator(lambda g, o: math.sin(g.h_r * 1e6 + g.h_g * 1e6 + o.N))
        fmap = run_sweep(example_rotor, reference_geometry, reference_operating,
                         spec, ev, progress=lambda d, t: calls.append((d, t)))
        assert calls == [(i + 1, 9) for i in range(9)]
        # recompute every cell independently in reversed order: bitwise equal
        mp = mass_properties(example_rotor)
        for i in reversed(range(3)):
            for j in reversed(range(3)):
                geom_cell = replace(reference_geometry,
                                    h_r=reference_geometry.h_r + fmap.dhr_axis[i],
                                    h_g=reference_geometry.h_g + fmap.dhg_axis[j])
                deltas = []
                for n_rpm in spec.speeds:
                    perf = ev.evaluate(mp, geom_cell,
                                       replace(reference_operating, N=n_rpm))
                    deltas.extend(m.log_dec for m in perf.modes if m.excited)
                assert fmap.worst_log_dec[i, j] == min(deltas)

    def test_failed_cells_reported_not_fatal(self, example_rotor, reference_geometry,
                                             reference_operating):
        nominal = reference_geometry.h_r

        class Flaky(ConstantEvaluator):
            def evaluate(self, mp, geom, op):
                if geom.h_r > nominal:
                    raise SingularSystemError("boom")
                return super().evaluate(mp, geom, op)

        spec = SweepSpec(speeds=(40000.0,), tolerance=ToleranceSpec(1e-6, 0.0, 5),
                         evaluator="oracle")
        fmap = run_sweep(example_rotor, reference_geometry, reference_operating,
                         spec, Flaky(lambda g, o: 1.0))
        assert fmap.valid.sum() == 3  # two grid points above nominal failed
        assert len(fmap.failures) == 2
        assert all(f["code"] == "singular_system" for f in fmap.failures)
        assert feasible_fraction(fmap) == 1.0

    def test_all_invalid_raises(self, example_rotor, reference_geometry,
                                reference_operating):
        class Dead(ConstantEvaluator):
            def evaluate(self, mp, geom, op):
                raise SingularSystemError("boom")

        spec = SweepSpec(speeds=(40000.0,), tolerance=ToleranceSpec(0.0, 0.0, 1),
                         evaluator="oracle")
        fmap = run_sweep(example_rotor, reference_geometry, reference_operating,
                         spec, Dead(None))
        with pytest.raises(InvariantError):
            feasible_fraction(fmap)

    def test_monotone_refinement(self, example_rotor, reference_geometry,
                                 reference_operating):
        ev = ConstantEvaluator(lambda g, o: math.copysign(
            1.0, math.sin(5e5 * (g.h_r - reference_geometry.h_r)) + 0.3))
        maps = {}
        for n in (11, 21):
            spec = SweepSpec(speeds=(40000.0,), tolerance=ToleranceSpec(2e-6, 0.0, n),
                             evaluator="oracle")
            maps[n] = run_sweep(example_rotor, reference_geometry,
                                reference_operating, spec, ev)
        coarse, fine = maps[11], maps[21]
        for i, dhr in enumerate(coarse.dhr_axis):
            j = int(np.argmin(np.abs(fine.dhr_axis - dhr)))
            assert fine.dhr_axis[j] == pytest.approx(dhr, abs=1e-18)
            assert fine.feasible[j, 0] == coarse.feasible[i, 0]

    def test_grid_validation(self):
        with pytest.raises(InvariantError):
            ToleranceSpec(delta_h_r=-1e-6, delta_h_g=0.0)
        with pytest.raises(InvariantError):
            ToleranceSpec(delta_h_r=1e-6, delta_h_g=0.0, grid_n=4)

    def test_clearance_must_stay_positive(self, example_rotor, reference_geometry,
                                          reference_operating):
        spec = SweepSpec(speeds=(40000.0,),
                         tolerance=ToleranceSpec(reference_geometry.h_r, 0.0, 3),
                         evaluator="oracle")
        with pytest.raises(InvariantError):
            run_sweep(example_rotor, reference_geometry, reference_operating,
                      spec, ConstantEvaluator(lambda g, o: 1.0))

    def test_speed_spec_validation(self):
        with pytest.raises(InvariantError):
            SweepSpec(speeds=(), tolerance=ToleranceSpec(0.0, 0.0, 1))
        with pytest.raises(InvariantError):
            SweepSpec(speeds=(2.0, 1.0), tolerance=ToleranceSpec(0.0, 0.0, 1))
        speeds = default_speeds(40000.0)
        assert len(speeds) == 11
        assert speeds[0] == pytest.approx(20000.0) and speeds[-1] == pytest.approx(48000.0)


class TestContours:
    def _small_map(self, example_rotor, geom, op):
        spec = SweepSpec(speeds=(40000.0,), tolerance=ToleranceSpec(1e-6, 1e-6, 3),
                         evaluator="oracle")
        return run_sweep(example_rotor, geom, op, spec,
                         ConstantEvaluator(lambda g, o: float(np.sign(g.h_g - geom.h_g))))

    def test_shapes_and_round_trip(self, example_rotor, reference_geometry,
                                   reference_operating):
        fmap = self._small_map(example_rotor, reference_geometry, reference_operating)
        doc = export_contours(fmap, design="abc123")
        assert len(doc["axes"]["delta_h_r_um"]) == 3
        assert len(doc["metrics"]["worst_log_dec"]) == 3
        text = json.dumps(doc)
        back = parse_contours(text)
        assert np.array_equal(back.dhr_axis, fmap.dhr_axis)
        assert np.array_equal(np.isnan(back.worst_log_dec), np.isnan(fmap.worst_log_dec))
        mask = ~np.isnan(fmap.worst_log_dec)
        assert np.array_equal(back.worst_log_dec[mask], fmap.worst_log_dec[mask])
        assert np.array_equal(back.feasible, fmap.feasible)
        assert np.array_equal(back.min_load_capacity, fmap.min_load_capacity)

    def test_export_matches_in_memory_extrema(self, example_rotor, reference_geometry,
                                              reference_operating):
        fmap = self._small_map(example_rotor, reference_geometry, reference_operating)
        doc = export_contours(fmap)
        grid = np.array([[np.nan if v is None else v for v in row]
                         for row in doc["metrics"]["worst_log_dec"]])
        assert np.nanmin(grid) == np.nanmin(fmap.worst_log_dec)
        assert np.nanmax(grid) == np.nanmax(fmap.worst_log_dec)

    def test_design_digest_stable(self, example_rotor, reference_geometry,
                                  reference_operating):
        a = design_digest(example_rotor, reference_geometry, reference_operating)
        b = design_digest(example_rotor, reference_geometry, reference_operating)
        assert a == b and len(a) == 64
