"""Projective-measurement classifier over encoded principal components.

A model holds ``s`` orthonormal components lifted to direct-sum states. The
measurement is ``{Pi, 1 - Pi}`` with ``Pi`` the projector onto their span.
One trial answers "yes" with probability ``<Phi(x)|Pi|Phi(x)> = M / n^2``,
where ``M`` is the squared length of the projection of ``x`` onto the
component subspace. Classification repeats the trial on ``n^2`` fresh copies
and answers "yes" if any trial does.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import as_vector, check_length, check_unit_interval
from .encoding import (
    encode_component,
    encode_image,
    per_pixel_dim,
    representation_inner_product,
)
from .exceptions import DimensionError, ModelIntegrityError
from .pca import PrincipalComponents
from .quantum import OPERATOR_TOL, ProjectorOperator

# uniforms are drawn in blocks so that early exit does not pay for n^2 draws
_DRAW_BLOCK = 4096


class Decision(str, enum.Enum):
    YES = "yes"
    NO = "no"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    components: PrincipalComponents
    encoded_components: tuple = field(repr=False)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s, n, k = self.s, self.n, self.k
        if len(self.encoded_components) != s:
            raise ModelIntegrityError(
                f"{len(self.encoded_components)} encoded components for s={s}"
            )
        for enc in self.encoded_components:
            if enc.n != n or enc.k != k:
                raise ModelIntegrityError(
                    f"encoded component has n={enc.n}, k={enc.k}; model has n={n}, k={k}"
                )
        gram = np.array(
            [
                [representation_inner_product(a, b) for b in self.encoded_components]
                for a in self.encoded_components
            ]
        )
        err = np.max(np.abs(gram - np.eye(s)))
        if err > OPERATOR_TOL:
            raise ModelIntegrityError(
                f"encoded components are not orthonormal (max deviation {err:.3g})"
            )

    @classmethod
    def from_components(cls, components, metadata=None):
        k = per_pixel_dim(components.s)
        encoded = tuple(
            encode_component(v, l, k) for l, v in enumerate(components.components, start=1)
        )
        return cls(components, encoded, dict(metadata or {}))

    @property
    def s(self):
        return self.components.s

    @property
    def n(self):
        return self.components.n

    @property
    def k(self):
        return per_pixel_dim(self.s)

    @property
    def dim(self):
        return self.n * self.k

    @property
    def default_trials(self):
        return self.n * self.n

    def __eq__(self, other):
        if not isinstance(other, ClassifierModel):
            return NotImplemented
        return (
            np.array_equal(self.components.components, other.components.components)
            and np.array_equal(
                self.components.singular_values, other.components.singular_values
            )
            and self.metadata == other.metadata
        )


@dataclass(frozen=True)
class ClassificationResult:
    decision: Decision
    trials_run: int
    positive_trial_index: Optional[int]
    per_trial_probability: float
    analytic_overall_no_probability: float
    seed: int
    n_trials: int
    input_norm: float

    @property
    def analytic_overall_yes_probability(self):
        return 1.0 - self.analytic_overall_no_probability

    def as_record(self):
        return {
            "decision": str(self.decision),
            "trials_run": self.trials_run,
            "positive_trial_index": self.positive_trial_index,
            "per_trial_probability": self.per_trial_probability,
            "analytic_overall_no_probability": self.analytic_overall_no_probability,
            "analytic_overall_yes_probability": self.analytic_overall_yes_probability,
            "n_trials": self.n_trials,
            "seed": self.seed,
            "input_norm": self.input_norm,
        }


def build_projector(model):
    """Gram-form projector onto the span of the encoded components."""
    states = [enc.state for enc in model.encoded_components]
    try:
        return ProjectorOperator(model.dim, states)
    except ValueError as exc:
        raise ModelIntegrityError(str(exc)) from None


def _feature(model, x):
    return check_length(as_vector(x), model.n)


def classical_likelihood(model, x):
    """``sum_l <V_l|x>^2`` computed directly on the classical vectors."""
    x = _feature(model, x)
    coeffs = model.components.components @ x
    return float(coeffs @ coeffs)


def yes_probability(model, x):
    """Single-trial "yes" probability ``sum_l |<Phi(V_l)|Phi(x)>|^2``."""
    x = check_unit_interval(_feature(model, x), "feature")
    phi = encode_image(x, model.k)
    overlaps = [representation_inner_product(enc, phi) for enc in model.encoded_components]
    return min(1.0, float(sum(o * o for o in overlaps)))


def overall_no_probability(p, trials):
    """Chance that all ``trials`` independent trials answer "no"."""
    return (1.0 - p) ** trials


def overall_yes_probability(p, trials):
    return 1.0 - overall_no_probability(p, trials)


def run_trial(model, x, rng):
    """One measurement of ``{Pi, 1 - Pi}`` on a fresh copy of ``Phi(x)``.

    A two-outcome projective measurement is fully described by its "yes"
    probability, so the trial is a Bernoulli draw against that value.
    """
    p = yes_probability(model, x)
    return Decision.YES if rng.random() < p else Decision.NO


def first_positive_trial(p, trials, seed):
    """Index of the first trial whose uniform draw falls below ``p``, or None.

    Trial ``i`` consumes the ``i``-th double of ``default_rng(seed)``, so its
    outcome is a function of ``(seed, i)`` only.
    """
    rng = np.random.default_rng(seed)
    done = 0
    while done < trials:
        block = min(_DRAW_BLOCK, trials - done)
        hits = np.flatnonzero(rng.random(block) < p)
        if hits.size:
            return done + int(hits[0])
        done += block
    return None


def classify(model, x, seed, n_trials=None):
    """Run the repeated-measurement protocol; "yes" on the first positive trial."""
    xv = _feature(model, x)
    p = yes_probability(model, xv)
    trials = model.default_trials if n_trials is None else int(n_trials)
    if trials < 1:
        raise DimensionError(f"trial count must be positive, got {trials}")
    hit = first_positive_trial(p, trials, seed)
    return ClassificationResult(
        decision=Decision.NO if hit is None else Decision.YES,
        trials_run=trials if hit is None else hit + 1,
        positive_trial_index=hit,
        per_trial_probability=p,
        analytic_overall_no_probability=overall_no_probability(p, trials),
        seed=int(seed),
        n_trials=trials,
        input_norm=float(math.sqrt(xv @ xv)),
    )


def analytic_report(model, x, n_trials=None):
    """Likelihood, single-trial and protocol probabilities without sampling."""
    m = classical_likelihood(model, x)
    p = yes_probability(model, x)
    trials = model.default_trials if n_trials is None else int(n_trials)
    return {
        "likelihood": m,
        "per_trial_probability": p,
        "analytic_overall_no_probability": overall_no_probability(p, trials),
        "analytic_overall_yes_probability": overall_yes_probability(p, trials),
        "n_trials": trials,
    }
