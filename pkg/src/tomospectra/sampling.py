"""Synthetic count generation with deterministic, replayable seeding.

Counts for one measurement setting are drawn either from a multinomial
distribution (fixed number of events per setting) or as independent
Poisson variables (fixed *expected* number of events).  The multinomial
draw delegates to numpy's generator, which implements the sequential
conditional-binomial splitting construction; no Gaussian shortcut is used
at any sample size, so rare-event rates stay honest.

Seeding
-------
Every (master_seed, replica, setting) triple owns its own counter-based
random stream: a Philox generator keyed by::

    key = (master_seed mod 2**64,  replica * 2**32 + setting)

The stream is a pure function of the triple, so replicas and settings can
be sampled in any order, split across any number of workers, and always
reproduce the same counts bit for bit.  Replica and setting indices must
stay below 2**32 each, which keeps the key injective.
"""

from dataclasses import dataclass

import numpy as np

from .pauli import Setting

_MASK64 = (1 << 64) - 1
_SHIFT = 1 << 32

MULTINOMIAL = "multinomial"
POISSON = "poisson"


class EmptySettingError(ValueError):
    """A setting recorded zero events, so frequencies are undefined."""


def philox_key(master_seed, replica_index, setting_index):
    """The 128-bit Philox key for one (master, replica, setting) triple."""
    if not 0 <= replica_index < _SHIFT:
        raise ValueError("replica index out of the 32-bit seeding range")
    if not 0 <= setting_index < _SHIFT:
        raise ValueError("setting index out of the 32-bit seeding range")
    word = (replica_index * _SHIFT + setting_index) & _MASK64
    return np.array([master_seed & _MASK64, word], dtype=np.uint64)


def stream(master_seed, replica_index=0, setting_index=0):
    """The dedicated random generator of one (master, replica, setting)."""
    return np.random.Generator(
        np.random.Philox(key=philox_key(master_seed, replica_index, setting_index))
    )


@dataclass(frozen=True)
class SeedPolicy:
    """Addresses one random stream inside a larger experiment."""

    master_seed: int
    replica_index: int = 0
    setting_index: int = 0

    def generator(self):
        return stream(self.master_seed, self.replica_index, self.setting_index)


@dataclass(frozen=True)
class CountModel:
    """How many events a setting receives and how they fluctuate.

    ``multinomial`` draws exactly ``events_per_setting`` events;
    ``poisson`` treats it as the expectation and lets the per-outcome
    counts fluctuate independently.
    """

    mode: str = MULTINOMIAL
    events_per_setting: int = 100

    def __post_init__(self):
        if self.mode not in (MULTINOMIAL, POISSON):
            raise ValueError("count model mode must be multinomial or poisson")
        if int(self.events_per_setting) < 1:
            raise ValueError("events per setting must be >= 1")
        object.__setattr__(self, "events_per_setting", int(self.events_per_setting))


@dataclass(frozen=True)
class CountRecord:
    """Outcome counts for one setting plus the recorded event total."""

    setting: Setting
    counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.min(initial=0) < 0:
            raise ValueError("negative counts")
        if int(counts.sum()) != self.total:
            raise ValueError("recorded total does not match the counts")


def _checked_probabilities(probs):
    probs = np.asarray(probs, dtype=float)
    if probs.min() < -1e-12:
        raise ValueError("negative probability beyond tolerance: %g" % probs.min())
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError("probabilities sum to %r, expected 1" % total)
    return probs / total


def _draw_counts(rng, probs, model):
    """Shared inner draw; ``probs`` must already be clean."""
    if model.mode == MULTINOMIAL:
        return rng.multinomial(model.events_per_setting, probs)
    return rng.poisson(model.events_per_setting * probs)


def sample_counts(probs, model, seed_ctx, setting=None):
    """Draw one setting's outcome counts.

    Parameters
    ----------
    probs : array_like
        Outcome probabilities for this setting; must sum to 1 within 1e-9.
    model : CountModel
    seed_ctx : SeedPolicy
        Identifies the stream; the draw is a pure function of it.
    setting : Setting, optional
        Attached to the returned record for bookkeeping.

    Returns
    -------
    CountRecord
    """
    probs = _checked_probabilities(probs)
    rng = seed_ctx.generator()
    counts = _draw_counts(rng, probs, model)
    return CountRecord(setting=setting, counts=counts, total=int(counts.sum()))


def frequencies(record):
    """Relative frequencies f_r = c_r / N_s of one count record."""
    if record.total == 0:
        raise EmptySettingError(
            "setting recorded zero events; frequencies are undefined"
        )
    return record.counts / record.total
