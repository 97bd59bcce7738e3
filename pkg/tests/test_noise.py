import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toric3d.noise import (erasure_from_indices, sample_bitflip, sample_erasure,
                           sample_phaseflip, trial_rng)


@pytest.mark.parametrize("sampler,part", [(sample_bitflip, "x"), (sample_phaseflip, "z")])
def test_pauli_channels(sampler, part):
    other = "z" if part == "x" else "x"
    f0 = sampler(50, 0.0, trial_rng(1, 0, 0))
    assert not f0.x.any() and not f0.z.any()
    f1 = sampler(50, 1.0, trial_rng(1, 0, 0))
    assert getattr(f1, part).all() and not getattr(f1, other).any()
    n = 100_000
    w = int(getattr(sampler(n, 0.5, trial_rng(1, 0, 1)), part).sum())
    assert abs(w - n / 2) < 5 * np.sqrt(n / 4)


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_invalid_probability(p):
    for sampler in (sample_bitflip, sample_phaseflip, sample_erasure):
        with pytest.raises(ValueError):
            sampler(10, p, trial_rng(0, 0, 0))


def test_erasure_extremes():
    s = sample_erasure(30, 0.0, trial_rng(2, 0, 0))
    assert not s.erased.any() and not s.induced.x.any() and not s.induced.z.any()
    counts = np.zeros(4)
    for t in range(4000):
        s = sample_erasure(4, 1.0, trial_rng(2, 1, t))
        assert s.erased.all()
        np.add.at(counts, 2 * s.induced.x + s.induced.z, 1)
    freq = counts / counts.sum()
    assert np.allclose(freq, 0.25, atol=0.02)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 100), st.floats(0, 1), st.integers(1, 300))
def test_erasure_support_contained(seed, trial, p, n):
    s = sample_erasure(n, p, trial_rng(seed, 0, trial))
    assert not (s.induced.x.astype(bool) & ~s.erased).any()
    assert not (s.induced.z.astype(bool) & ~s.erased).any()


def test_determinism_and_stream_independence():
    a = sample_erasure(500, 0.3, trial_rng(7, 2, 11))
    b = sample_erasure(500, 0.3, trial_rng(7, 2, 11))
    c = sample_erasure(500, 0.3, trial_rng(7, 2, 12))
    assert (a.erased == b.erased).all() and (a.induced.x == b.induced.x).all()
    assert not (a.erased == c.erased).all()


def test_known_stream_values():
    # frozen after computing once: guards the documented seeding scheme
    r = trial_rng(0, 0, 0).random(3)
    again = np.random.Generator(np.random.Philox(np.random.SeedSequence([0, 0, 0]))).random(3)
    assert (r == again).all()


def test_erasure_from_indices():
    s = erasure_from_indices(6, [1, 2], x=[1], z=[1, 2])
    assert s.indices.tolist() == [1, 2]
    with pytest.raises(ValueError):
        erasure_from_indices(6, [1], x=[3])
