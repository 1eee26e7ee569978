"""Generative site-phase disorder with closed-form correlators.

Sampling is deterministic in ``(seed, n_samples)``: sample ``i`` is drawn from
the generator of block ``i // BLOCK_SIZE``, keyed by ``SeedSequence(seed,
spawn_key=(block,))``.  Blocks can be handed to any number of workers without
changing the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from ._validation import DomainError, check_nonnegative, check_positive
from .analytic import CorrelatorProfile, PhaseConfiguration

BLOCK_SIZE = 1024
DEFAULT_WINDOW = (-75, 75)  # 151 sites, the size of the sample in the experiment

Kind = Literal["coherent", "independent-uniform", "gaussian-random-walk"]
KINDS = ("coherent", "independent-uniform", "gaussian-random-walk")


@dataclass(frozen=True)
class DisorderModel:
    """Phase disorder model.

    ``epsilon`` is the per-step phase standard deviation of the random walk;
    it is ignored by the other kinds.
    """

    kind: Kind = "coherent"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown disorder model {self.kind!r}; expected one of {KINDS}")
        check_nonnegative(self.epsilon, "epsilon")

    @classmethod
    def random_walk_for_length(cls, xi: float) -> "DisorderModel":
        """Random walk whose correlator decays as exp(-N / xi)."""
        xi = check_positive(xi, "xi")
        return cls("gaussian-random-walk", 0.0 if math.isinf(xi) else math.sqrt(2.0 / xi))

    @property
    def coherence_length(self) -> float:
        """Decay length (sites) of the closed-form correlator."""
        if self.kind == "coherent" or (self.kind == "gaussian-random-walk" and self.epsilon == 0):
            return math.inf
        if self.kind == "independent-uniform":
            return 0.0
        return 2.0 / self.epsilon**2

    def correlator(self, N):
        return closed_form_correlator(self, N)

    def profile(self, n_max: int) -> CorrelatorProfile:
        return CorrelatorProfile(self.correlator(np.arange(n_max + 1)))


def closed_form_correlator(model: DisorderModel, N):
    """<exp[i(phi_n - phi_{n+N})]> for the model, vectorized over ``N``."""
    N = np.abs(np.asarray(N))
    if model.kind == "coherent":
        out = np.ones(N.shape)
    elif model.kind == "independent-uniform":
        out = (N == 0).astype(float)
    else:
        out = np.exp(-N * model.epsilon**2 / 2.0)
    return out if out.ndim else float(out)


def _sample_block(model: DisorderModel, n_sites: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if model.kind == "coherent":
        return np.zeros((count, n_sites))
    if model.kind == "independent-uniform":
        return rng.uniform(0.0, 2.0 * math.pi, size=(count, n_sites))
    steps = rng.normal(0.0, model.epsilon, size=(count, n_sites - 1))
    return np.concatenate([np.zeros((count, 1)), np.cumsum(steps, axis=1)], axis=1)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


def iter_blocks(n_samples: int, block_size: int = BLOCK_SIZE):
    """Yield (block index, start, stop) covering ``range(n_samples)``."""
    for block, start in enumerate(range(0, n_samples, block_size)):
        yield block, start, min(start + block_size, n_samples)


def sample_phase_batch(
    model: DisorderModel,
    n_samples: int,
    window: tuple[int, int] = DEFAULT_WINDOW,
    seed: int = 0,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Phases of ``n_samples`` realizations, shape ``(n_samples, n_sites)``."""
    n_min, n_max = window
    if not n_min <= 0 <= n_max:
        raise DomainError(f"window {window} must contain site 0")
    n_sites = n_max - n_min + 1
    out = np.empty((n_samples, n_sites))

    def fill(block_range):
        block, start, stop = block_range
        out[start:stop] = _sample_block(model, n_sites, stop - start, block_rng(seed, block))

    blocks = list(iter_blocks(n_samples))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    else:
        for b in blocks:
            fill(b)
    return out


def sample_phases(model: DisorderModel, window: tuple[int, int] = DEFAULT_WINDOW, seed: int = 0) -> PhaseConfiguration:
    """One realization; identical to row 0 of ``sample_phase_batch`` with the same seed."""
    phases = sample_phase_batch(model, 1, window, seed)[0]
    return PhaseConfiguration(window[0], window[1], phases)


def empirical_correlator(phases: np.ndarray, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample estimate of C_N, N = 0..n_max, with its standard error.

    Each realization contributes the mean of cos(phi_n - phi_{n+N}) over all
    site pairs in its window; the standard error is taken across realizations.
    """
    phases = np.atleast_2d(phases)
    n_samples, n_sites = phases.shape
    if n_max >= n_sites:
        raise DomainError(f"n_max = {n_max} needs a window of more than {n_sites} sites")
    means = np.empty(n_max + 1)
    errors = np.empty(n_max + 1)
    for N in range(n_max + 1):
        per_sample = np.cos(phases[:, : n_sites - N] - phases[:, N:]).mean(axis=1)
        means[N] = per_sample.mean()
        errors[N] = per_sample.std(ddof=1) / math.sqrt(n_samples) if n_samples > 1 else math.inf
    return means, errors


def correlator_profile_for_quench(xi_coh: float, n_max: int = 1024) -> CorrelatorProfile:
    """Exponential profile C_N = exp(-N / xi_coh); ``math.inf`` gives full coherence."""
    xi_coh = check_positive(xi_coh, "xi_coh")
    if math.isinf(xi_coh):
        return CorrelatorProfile.constant(1.0, n_max)
    return CorrelatorProfile(np.exp(-np.arange(n_max + 1) / xi_coh))


def exponential_coherence_length(profile: CorrelatorProfile, rtol: float = 1e-6) -> float:
    """Read xi from a profile of the form C_N = exp(-N / xi).

    Returns ``math.inf`` for C_1 = 1 and 0.0 for C_1 = 0 (C_N = delta_N0).
    Raises DomainError when the profile is not of this form.
    """
    if profile.n_max < 1:
        raise DomainError("need at least C_1 to read a coherence length")
    c1 = profile.values[1]
    n = np.arange(profile.n_max + 1)
    if c1 <= 0:
        expected = (n == 0).astype(float)
        xi = 0.0
    else:
        expected = c1**n
        xi = math.inf if c1 >= 1.0 else -1.0 / math.log(c1)
    if not np.allclose(profile.values, expected, rtol=rtol, atol=1e-12):
        raise DomainError("correlator profile is not exponential in N")
    return xi
