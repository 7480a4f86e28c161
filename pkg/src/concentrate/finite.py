"""Single-copy concentration: optimal probability and the threshold protocol.

Distilling a maximally entangled state of size L from a spectrum p succeeds
with probability at most

    P_L = min_{1 <= l <= L}  L / (L - l + 1) * sum_{i >= l} p_i,

and the optimum is achieved by a two-outcome measurement that truncates the
spectrum at a threshold t: coefficients above t are damped to t, the rest
pass through. The threshold is pinned by L = sum_i min(1, p_i / t), which
makes P_L = t * L an exact identity. solve_plan finds t in closed form by
scanning the candidate intervals between consecutive coefficients, where
the defining equation is linear in t.

For L <= floor(1/p_1) no truncation is needed; the scan then lands on
t = 1/L >= p_1, which keeps P = t*L = 1 exact without a special case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeOutOfRangeError, SolverError
from .numerics import tolerant_floor
from .spectra import SchmidtSpectrum, new_spectrum


@dataclass(frozen=True, eq=False)
class ConcentrationPlan:
    """A solved truncation protocol for one (spectrum, L) pair.

    cut_index is 1-based: coefficients with index < cut_index sit strictly
    above the threshold and get damped; the rest are untouched.
    """

    target_size: int
    threshold: float
    cut_index: int
    success_prob: float
    measurement_coeffs: np.ndarray

    def __post_init__(self):
        self.measurement_coeffs.setflags(write=False)

    @property
    def failure_prob(self) -> float:
        return 1.0 - self.success_prob


def _check_size(p: SchmidtSpectrum, target_size: int) -> None:
    if not (1 <= target_size <= p.dim):
        raise SizeOutOfRangeError(
            f"size {target_size} outside [1, {p.dim}] for this spectrum"
        )


def deterministic_yield(p: SchmidtSpectrum) -> int:
    """Largest size distillable with probability one: floor(1 / p_1)."""
    return tolerant_floor(1.0 / float(p.probs[0]))


def optimal_probability(p: SchmidtSpectrum, target_size: int) -> float:
    """Optimal success probability for target size L, by direct minimization."""
    _check_size(p, target_size)
    L = target_size
    # suffix[l-1] = sum_{i=l}^{d} p_i for 1-based l
    suffix = np.cumsum(p.probs[::-1])[::-1]
    l = np.arange(1, L + 1)
    # the l=1 term is sum(p) which can land an ulp above 1 after validation
    return float(min(np.min(L * suffix[:L] / (L - l + 1)), 1.0))


def solve_plan(p: SchmidtSpectrum, target_size: int) -> ConcentrationPlan:
    """Solve the truncation threshold and assemble the full protocol."""
    _check_size(p, target_size)
    L = target_size
    probs = p.probs
    suffix = np.cumsum(probs[::-1])[::-1]
    # k = number of coefficients strictly above t; within each candidate
    # interval the defining equation is linear: t = (tail mass) / (L - k)
    for k in range(0, min(L, probs.size)):
        t = suffix[k] / (L - k)
        above_ok = k == 0 or probs[k - 1] > t
        # right edge tolerates roundoff: at an exact tie t = p_{k+1} this
        # interval is the conventional (smallest-k) answer
        below_ok = t >= probs[k] - 1e-14
        if above_ok and below_ok:
            coeffs = np.minimum(1.0, np.sqrt(t / probs))
            return ConcentrationPlan(
                target_size=L,
                threshold=float(t),
                cut_index=k + 1,
                success_prob=float(min(t * L, 1.0)),
                measurement_coeffs=coeffs,
            )
    raise SolverError(
        f"no threshold interval bracketed size {L}; spectrum may be corrupt"
    )


def post_measurement_spectrum(
    plan: ConcentrationPlan, p: SchmidtSpectrum
) -> SchmidtSpectrum:
    """Spectrum after a successful truncation outcome.

    Entries are min(t, p_i) / P; the first cut_index - 1 all equal t / P,
    which is 1/L, so the result concentrates deterministically to size >= L.
    """
    clipped = np.minimum(plan.threshold, p.probs)
    return new_spectrum(clipped / plan.success_prob, renormalize=True)
