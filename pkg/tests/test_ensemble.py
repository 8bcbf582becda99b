import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopsim.ensemble import (
    EnsembleFormatError,
    FieldEnsemble,
    Hops,
    Polarized,
    RandomnessSpec,
    Unpolarized,
    circular_variance,
    classical_hidden,
    classical_stokes,
    ensemble_from_amplitudes,
    ensemble_from_csv,
    ensemble_to_csv,
    generate_ensemble,
    randomness_audit,
    read_ensemble,
    write_ensemble,
)
from hopsim.polarization import phase


def python_hidden_oracle(chi_h, delta_h, a0, n, seed):
    """Plain-python Monte Carlo of the hidden parameters (no numpy, no package code)."""
    rng = random.Random(seed)
    acc = [0.0, 0.0, 0j]
    for _ in range(n):
        phi = rng.uniform(0, 2 * math.pi)
        ax = a0 * math.cos(chi_h / 2) * cmath.exp(1j * (phi + delta_h / 2))
        ay = a0 * math.sin(chi_h / 2) * cmath.exp(1j * (-phi + delta_h / 2))
        acc[0] += abs(ay) ** 2 + abs(ax) ** 2
        acc[1] += abs(ay) ** 2 - abs(ax) ** 2
        acc[2] += 2 * ay * ax
    h0, h1, c = (v / n for v in acc)
    return h0, h1, c.real, c.imag


class TestRandomnessSpec:
    def test_laws(self):
        rng = np.random.default_rng(0)
        assert np.all(RandomnessSpec.constant(2.0, 1).draw_amplitudes(rng, 5) == 2.0)
        u = RandomnessSpec.uniform(1.0, 2.0, 1).draw_amplitudes(rng, 1000)
        assert u.min() >= 1.0 and u.max() < 2.0
        assert np.all(RandomnessSpec.rayleigh(1.0, 1).draw_amplitudes(rng, 100) >= 0)

    @pytest.mark.parametrize("amp", [("constant", -1.0), ("uniform", 2.0, 1.0), ("rayleigh", 0.0), ("gamma", 1.0)])
    def test_invalid(self, amp):
        with pytest.raises(ValueError):
            RandomnessSpec(1, amp)

    def test_invalid_seed(self):
        with pytest.raises(ValueError):
            RandomnessSpec(-1)

    def test_dict_round_trip(self):
        spec = RandomnessSpec.uniform(0.5, 1.5, 99)
        assert RandomnessSpec.from_dict(spec.to_dict()) == spec


class TestGenerate:
    def test_hops_small(self):
        e = generate_ensemble(Hops(math.pi / 2, 0.0), RandomnessSpec.constant(1.0, 42), 3)
        assert len(e) == 3
        for s in e:
            a = s.amplitudes
            assert abs(abs(a.primary) - 1 / math.sqrt(2)) < 1e-15
            assert abs(abs(a.orthogonal) - 1 / math.sqrt(2)) < 1e-15
            gap = cmath.phase(a.primary) + cmath.phase(a.orthogonal)
            assert abs(cmath.phase(cmath.exp(1j * gap))) < 1e-12

    def test_polarized_ratio(self):
        e = generate_ensemble(Polarized(math.pi / 2, 0.0), RandomnessSpec.rayleigh(1.0, 3), 100)
        assert np.allclose(e.ay / e.ax, 1.0, atol=1e-12)

    def test_determinism(self):
        spec = RandomnessSpec.uniform(0.5, 2.0, 7)
        a = generate_ensemble(Hops(1.0, 0.3), spec, 5000)
        b = generate_ensemble(Hops(1.0, 0.3), spec, 5000)
        assert np.array_equal(a.ax, b.ax) and np.array_equal(a.ay, b.ay)

    @pytest.mark.parametrize("kind", [Hops(1.0, 0.3), Polarized(2.0, -1.0), Unpolarized()])
    def test_worker_count_invariance(self, kind):
        spec = RandomnessSpec.rayleigh(1.0, 11)
        ref = ensemble_to_csv(generate_ensemble(kind, spec, 20000, workers=1))
        for workers in (2, 4):
            assert ensemble_to_csv(generate_ensemble(kind, spec, 20000, workers=workers)) == ref

    def test_prefix_stable(self):
        # chunked substreams: a longer run extends a shorter one
        spec = RandomnessSpec.constant(1.0, 5)
        short = generate_ensemble(Hops(1.0, 0.0), spec, 5000)
        long = generate_ensemble(Hops(1.0, 0.0), spec, 9000)
        assert np.array_equal(long.ax[:5000], short.ax)

    def test_seed_matters(self):
        a = generate_ensemble(Hops(1.0, 0.0), RandomnessSpec.constant(1.0, 1), 10)
        b = generate_ensemble(Hops(1.0, 0.0), RandomnessSpec.constant(1.0, 2), 10)
        assert not np.array_equal(a.ax, b.ax)

    @pytest.mark.parametrize("n", [0, -3, 2.5])
    def test_bad_n(self, n):
        with pytest.raises(ValueError):
            generate_ensemble(Hops(1.0, 0.0), RandomnessSpec.constant(1.0, 1), n)

    def test_bad_angles(self):
        with pytest.raises(ValueError):
            Hops(4.0, 0.0)
        with pytest.raises(ValueError):
            Polarized(1.0, -math.pi)

    def test_read_only(self):
        e = generate_ensemble(Hops(1.0, 0.0), RandomnessSpec.constant(1.0, 1), 4)
        with pytest.raises(ValueError):
            e.ax[0] = 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            FieldEnsemble(np.array([]), np.array([]), Unpolarized())


class TestStatistics:
    def test_x_polarized(self):
        e = ensemble_from_amplitudes([1.0] * 10, [0.0] * 10)
        s = classical_stokes(e)
        assert s.values == (1.0, -1.0, 0.0, 0.0)

    def test_hops_looks_unpolarized(self):
        n = 100_000
        e = generate_ensemble(Hops(math.pi / 2, 0.0), RandomnessSpec.constant(1.0, 42), n)
        s = classical_stokes(e)
        assert abs(s.s0 - 1) < 1e-12
        for v in (s.s1, s.s2, s.s3):
            assert abs(v) <= 5 / math.sqrt(n)
        h = classical_hidden(e)
        for got, want in zip(h.values, (1, 0, 1, 0)):
            assert abs(got - want) <= 5 / math.sqrt(n)

    def test_circular_polarized(self):
        n = 20_000
        e = generate_ensemble(Polarized(math.pi / 2, math.pi / 2), RandomnessSpec.constant(1.0, 3), n)
        for got, want in zip(classical_stokes(e).values, (1, 0, 0, 1)):
            assert abs(got - want) <= 5 / math.sqrt(n)

    def test_hidden_closed_form_and_python_oracle(self):
        n = 20_000
        chi_h, delta_h = math.pi / 3, math.pi / 2
        e = generate_ensemble(Hops(chi_h, delta_h), RandomnessSpec.constant(1.0, 8), n)
        h = classical_hidden(e)
        closed = (1.0, -math.cos(chi_h), 0.0, math.sin(chi_h))
        oracle = python_hidden_oracle(chi_h, delta_h, 1.0, n, 8)
        for got, want, mc in zip(h.values, closed, oracle):
            assert abs(got - want) <= 5 / math.sqrt(n)
            assert abs(mc - want) <= 5 / math.sqrt(n)

    def test_polarized_hidden_vanishes(self):
        n = 50_000
        e = generate_ensemble(Polarized(math.pi / 2, 0.0), RandomnessSpec.constant(1.0, 4), n)
        h = classical_hidden(e)
        assert abs(h.h2) <= 5 / math.sqrt(n) and abs(h.h3) <= 5 / math.sqrt(n)

    @pytest.mark.parametrize("kind", [Hops(0.7, 1.0), Polarized(2.0, 0.5), Unpolarized()])
    def test_shared_terms_and_dop(self, kind):
        e = generate_ensemble(kind, RandomnessSpec.rayleigh(1.0, 6), 5000)
        s, h = classical_stokes(e), classical_hidden(e)
        assert s.s0 == h.h0 and s.s1 == h.h1
        slack = 3 * max(s.stderr)
        assert math.sqrt(s.s1**2 + s.s2**2 + s.s3**2) <= s.s0 + slack
        assert all(se >= 0 for se in s.stderr)

    def test_circular_variance(self):
        assert circular_variance([0.3] * 5) == 0.0
        assert circular_variance(np.linspace(0, 2 * np.pi, 1000, endpoint=False)) == pytest.approx(1.0)


class TestAudit:
    def test_classifications(self):
        spec = RandomnessSpec.rayleigh(1.0, 10)
        assert randomness_audit(generate_ensemble(Polarized(1.0, 0.5), spec, 200)).classification == "polarized"
        assert randomness_audit(generate_ensemble(Hops(1.0, 0.5), spec, 200)).classification == "hidden-polarized"
        assert randomness_audit(generate_ensemble(Unpolarized(), spec, 200)).classification == "neither"

    @given(st.floats(0.05, math.pi - 0.05), st.floats(-3.1, 3.1), st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_hops_invariants(self, chi_h, delta_h, seed):
        e = generate_ensemble(Hops(chi_h, delta_h), RandomnessSpec.uniform(0.2, 2.0, seed), 50)
        r = randomness_audit(e)
        assert r.ratio_variance <= 1e-12
        assert r.sum_circular_variance <= 1e-12
        assert r.difference_circular_variance > 0
        assert abs(phase(complex(math.cos(r.sum_mean - delta_h), math.sin(r.sum_mean - delta_h)))) < 1e-10

    def test_zero_x_excluded(self):
        e = ensemble_from_amplitudes([0, 1, 1], [1, 1, 1])
        r = randomness_audit(e)
        assert r.ratio_excluded == 1
        assert r.classification == "neither"

    def test_single_mode_is_polarized(self):
        e = ensemble_from_amplitudes([1, 1j, -1], [0, 0, 0])
        assert randomness_audit(e).classification == "polarized"

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            randomness_audit(ensemble_from_amplitudes([1], [1]))


class TestCsv:
    def test_round_trip_exact(self, tmp_path):
        e = generate_ensemble(Hops(1.2, -0.4), RandomnessSpec.rayleigh(0.8, 3), 257)
        path = tmp_path / "e.csv"
        write_ensemble(e, path)
        back = read_ensemble(path)
        assert np.array_equal(back.ax, e.ax) and np.array_equal(back.ay, e.ay)
        assert back.kind == e.kind and back.spec == e.spec
        assert ensemble_to_csv(back) == path.read_text()

    @pytest.mark.parametrize(
        "text, line",
        [
            ("", 1),
            ("re_ax,im_ax,re_ay,im_ay\n1,0,0,0\n", 1),
            ('# {"kind": {"name": "unpolarized"}}\nbad\n', 2),
            ('# {"kind": {"name": "unpolarized"}}\nre_ax,im_ax,re_ay,im_ay\n1,0,0\n', 3),
            ('# {"kind": {"name": "unpolarized"}}\nre_ax,im_ax,re_ay,im_ay\n1,0,0,0\n1,x,0,0\n', 4),
            ('# {"kind": {"name": "unpolarized"}}\nre_ax,im_ax,re_ay,im_ay\n1,0,nan,0\n', 3),
            ('# {"kind": {"name": "unpolarized"}, "n": 2}\nre_ax,im_ax,re_ay,im_ay\n1,0,0,0\n', 1),
        ],
    )
    def test_format_errors(self, text, line):
        with pytest.raises(EnsembleFormatError) as info:
            ensemble_from_csv(text)
        assert info.value.line == line
