"""Error channels and per-trial random streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import PauliFrame

BITFLIP = "bitflip"
PHASEFLIP = "phaseflip"
ERASURE = "erasure"
CHANNELS = (BITFLIP, PHASEFLIP, ERASURE)


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Independent counter-based stream for one trial of one grid point."""
    ss = np.random.SeedSequence([int(master_seed), int(point_index), int(trial_index)])
    return np.random.Generator(np.random.Philox(ss))


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return p


def _flips(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(n) < _check_p(p)).astype(np.uint8)


def sample_bitflip(n: int, p: float, rng: np.random.Generator) -> PauliFrame:
    return PauliFrame(x=_flips(n, p, rng), z=np.zeros(n, np.uint8))


def sample_phaseflip(n: int, p: float, rng: np.random.Generator) -> PauliFrame:
    return PauliFrame(x=np.zeros(n, np.uint8), z=_flips(n, p, rng))


@dataclass(eq=False)
class ErasureSample:
    erased: np.ndarray      # bool mask over qubits
    induced: PauliFrame

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.erased)


def sample_erasure(n: int, p: float, rng: np.random.Generator) -> ErasureSample:
    """Erase each qubit with probability p and apply a uniform Pauli to it."""
    erased = rng.random(n) < _check_p(p)
    mask = erased.astype(np.uint8)
    x = rng.integers(0, 2, n, dtype=np.uint8) & mask
    z = rng.integers(0, 2, n, dtype=np.uint8) & mask
    return ErasureSample(erased=erased, induced=PauliFrame(x=x, z=z))


def erasure_from_indices(n: int, indices, x=(), z=()) -> ErasureSample:
    erased = np.zeros(n, dtype=bool)
    erased[list(indices)] = True
    fx = np.zeros(n, np.uint8)
    fz = np.zeros(n, np.uint8)
    fx[list(x)] = 1
    fz[list(z)] = 1
    if (fx & ~erased).any() or (fz & ~erased).any():
        raise ValueError("induced error must be supported on the erased qubits")
    return ErasureSample(erased=erased, induced=PauliFrame(x=fx, z=fz))
