"""Pole locations and residue tables behind every asymptotic observable.

With pure dephasing the survival probability, pulse shape and photon
kernel are all single sums over the four roots mu_j of

    1 - 2 * gamma_p * L(z) = 0,

where L is the Laplace transform of |alpha0|^2.  Clearing denominators
turns this into a monic quartic whose roots are found from the companion
matrix and polished by Newton iteration on the rational function itself.
For gamma_p -> 0 the four roots collapse onto the poles of L (the pair
sums lambda_m + conj(lambda_n)) and the residue denominators become
ill-conditioned, so below gamma_p = 1e-6 * max(g, kappa) the factorized
zero-dephasing tables are used instead.

Weight normalization: the kernel and pulse tables carry the overall
cavity escape factor kappa, fixed by the requirement that the emitted
fraction sum(pulse / -mu) equal 1 for gamma = 0 and that the dephasing-free
limit reduce to kappa * beta0(u) * conj(beta0(u')).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .linear_dynamics import (
    EigenSystem,
    decay_pair_poles,
    survival_pair_weights,
)

BYPASS_RTOL = 1e-6
REPEATED_RTOL = 1e-9
SNAP_RTOL = 1e-12
REINIT_RTOL = 1e-5


class RepeatedPoles(ValueError):
    """Two quartic roots collided; residue formulas divide by their gap."""


@dataclass(frozen=True)
class PoleSystem:
    """Four poles plus the residue tables of the asymptotic observables.

    poles            : (4,) complex, ordered by descending real part then
                       descending imaginary part
    survival_weights : (4,) complex; survival P(t) = sum_j w_j exp(mu_j t)
    pulse_weights    : (4,) complex; pulse f(tau) = sum_j w_j exp(mu_j tau)
    kernel_weights   : (4, 2) complex; photon kernel
                       rho(u, u') = sum_{j,m} w_jm exp(lam_m (u-u') + mu_j u')
                       for u >= u'
    """

    poles: np.ndarray
    survival_weights: np.ndarray
    pulse_weights: np.ndarray
    kernel_weights: np.ndarray
    eigen: EigenSystem
    gamma_p: float
    bypass: bool
    pinned: np.ndarray
    snapped: np.ndarray

    @property
    def params(self):
        return self.eigen.params


def _order(poles: np.ndarray) -> np.ndarray:
    """Deterministic pole ordering: descending Re, then descending Im."""
    return np.lexsort((-poles.imag, -poles.real))


def _check_separation(poles: np.ndarray, assembled: np.ndarray | None = None) -> None:
    """Refuse colliding roots whose residues come from the gap formulas.

    Pairs where neither root is assembled (both sit exactly on pole
    targets with limit-value residues) are exempt: nothing divides by
    their gap.
    """
    if assembled is None:
        assembled = np.ones(len(poles), dtype=bool)
    scale = max(1.0, float(np.max(np.abs(poles))))
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if not (assembled[i] and assembled[j]):
                continue
            if abs(poles[i] - poles[j]) <= REPEATED_RTOL * scale:
                raise RepeatedPoles(
                    f"|mu_{i} - mu_{j}| = {abs(poles[i] - poles[j]):.3e} <= "
                    f"{REPEATED_RTOL:.0e} * {scale:.3e}; perturb the "
                    "parameters to separate the poles"
                )


def _target_groups(s: np.ndarray, scale: float):
    """Partition the pole targets into groups of coincident values."""
    groups = []
    used = np.zeros(len(s), dtype=bool)
    for k in range(len(s)):
        if used[k]:
            continue
        members = [l for l in range(len(s)) if abs(s[l] - s[k]) <= 1e-12 * scale]
        for l in members:
            used[l] = True
        groups.append((s[k], members))
    return groups


def _local_eta(value, members, s, c, gamma_p):
    """Resonance denominator of the root displaced from the target group."""
    others = [l for l in range(len(s)) if l not in members]
    return 1.0 - 2.0 * gamma_p * sum(c[l] / (value - s[l]) for l in others)


def _local_root_gap(value, members, s, c, gamma_p):
    """First-order distance of the genuine root from its target group."""
    eta = _local_eta(value, members, s, c, gamma_p)
    combined = sum(c[l] for l in members)
    if eta == 0.0:
        return np.inf
    return 2.0 * gamma_p * combined / eta


def _duplicated_targets(s: np.ndarray) -> list[complex]:
    """Pole targets lambda_m + conj(lambda_n) that coincide.

    On resonance the target multiset always carries one exact duplicate
    (real eigenvalues give lambda1 + lambda2 twice, a conjugate pair gives
    lambda1 + conj(lambda1) = lambda2 + conj(lambda2)); detuned parameters
    can hit the same confluence when the eigenvalue real parts cross.
    """
    scale = max(1.0, float(np.max(np.abs(s))))
    dups = []
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if abs(s[i] - s[j]) <= 1e-12 * scale:
                dups.append(0.5 * (s[i] + s[j]))
    return dups


def _quartic_roots(es: EigenSystem, gamma_p: float):
    """Companion-matrix roots of the cleared pole equation, Newton-polished.

    When a pole target is duplicated, the cleared quartic keeps one root
    exactly there with identically vanishing residues (the common factor
    cancels between numerator and denominator of the transform).  That
    root is pinned to the duplicated target and excluded from polishing,
    since it is not a zero of the rational pole equation itself.
    """
    s = decay_pair_poles(es)
    c = survival_pair_weights(es)

    # Monic quartic: prod(z - s_k) - 2 gamma_p sum_k c_k prod_{l!=k}(z - s_l).
    coeffs = np.poly(s).astype(complex)
    cubic = np.zeros(4, dtype=complex)
    for k in range(4):
        cubic += c[k] * np.poly(np.delete(s, k)).astype(complex)
    coeffs[1:] -= 2.0 * gamma_p * cubic

    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(s))))
    pinned = np.zeros(4, dtype=bool)
    snapped = np.zeros(4, dtype=bool)

    def claim_nearest(value, reach):
        free = np.flatnonzero(~(pinned | snapped))
        if len(free) == 0:
            return None
        idx = free[int(np.argmin(np.abs(roots[free] - value)))]
        if abs(roots[idx] - value) > reach:
            return None
        return idx

    # Exactly one quartic root belongs to each duplicated target (the
    # cleared polynomial factors as (z - dup) * cubic); claim the nearest.
    for dup in _duplicated_targets(s):
        idx = claim_nearest(dup, np.inf)
        roots[idx] = dup
        pinned[idx] = True

    # A genuine root sits 2 gamma_p c~ / eta away from its target, where
    # c~ is the combined weight of the coincident targets and eta the
    # local resonance denominator 1 - 2 gamma_p sum' c_l / (s_k - s_l).
    # When that gap is below float resolution the root is snapped onto the
    # target and its residues take the local limit values (c~/eta^2 for
    # the survival weight, factorized/eta for the kernel rows).  When the
    # gap is merely small, the companion estimate is unreliable (the root
    # pairs up with the target like a near-double root), so Newton is
    # restarted from the second-order-accurate prediction instead.
    for value, members in _target_groups(s, scale):
        gap = _local_root_gap(value, members, s, c, gamma_p)
        if abs(gap) <= SNAP_RTOL * scale:
            idx = claim_nearest(value, max(1e-5 * scale, 10.0 * abs(gap)))
            if idx is not None:
                roots[idx] = value
                snapped[idx] = True
        elif abs(gap) <= REINIT_RTOL * scale:
            idx = claim_nearest(value, max(1e-5 * scale, 10.0 * abs(gap)))
            if idx is not None:
                roots[idx] = value + gap

    for idx, z in enumerate(roots):
        if pinned[idx] or snapped[idx]:
            continue
        start = z
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for _ in range(100):
                gaps = z - s
                if float(np.min(np.abs(gaps))) <= 1e-14 * scale:
                    break
                resid = 1.0 - 2.0 * gamma_p * np.sum(c / gaps)
                if abs(resid) <= 1e-13:
                    break
                deriv = 2.0 * gamma_p * np.sum(c / gaps**2)
                step = resid / deriv
                if not np.isfinite(step.real) or not np.isfinite(step.imag):
                    break
                z = z - step
                if abs(z) > 100.0 * scale:
                    z = start
                    break
                if abs(step) <= 1e-16 * max(1.0, abs(z)):
                    break
        roots[idx] = z
        if float(np.min(np.abs(roots[idx] - s))) <= SNAP_RTOL * scale:
            roots[idx] = s[int(np.argmin(np.abs(roots[idx] - s)))]
            snapped[idx] = True
    return roots, pinned, snapped


def _residue_prefactor(mu: np.ndarray, s: np.ndarray, j: int) -> complex:
    """prod_k (mu_j - s_k) / prod_{i != j} (mu_j - mu_i) for root j."""
    num = np.prod(mu[j] - s)
    den = np.prod(mu[j] - np.delete(mu, j))
    return num / den


def _dephasing_tables(es: EigenSystem, gamma_p: float):
    """Pole and residue tables for gamma_p > 0 via the quartic route."""
    mu, pinned, snapped = _quartic_roots(es, gamma_p)

    s = decay_pair_poles(es)
    c = survival_pair_weights(es)
    scale = max(1.0, float(np.max(np.abs(s))))

    # Residue prefactors divide by root gaps.  Two genuine roots colliding
    # is a measure-zero confluence and is refused; a genuine root close to
    # an on-target root is fine (the numerator zero cancels the gap
    # exactly, so the assembled weights stay finite and accurate).
    assembled = ~(pinned | snapped)
    _check_separation(mu, assembled)

    kappa = es.params.kappa
    B = es.B
    lam = es.lambdas
    pairs = ((0, 0), (0, 1), (1, 0), (1, 1))
    survival = np.zeros(4, dtype=complex)
    pulse = np.zeros(4, dtype=complex)
    kernel = np.zeros((4, 2), dtype=complex)
    for j in range(4):
        if pinned[j]:
            continue
        if snapped[j]:
            # limit of the residue formulas as the root meets the target:
            # factorized weights of the coincident (m, n) pairs, corrected
            # by the local resonance denominator eta
            members = [k for k in range(4) if abs(mu[j] - s[k]) <= 1e-10 * scale]
            eta = _local_eta(mu[j], members, s, c, gamma_p)
            for k in members:
                m, n = pairs[k]
                survival[j] += c[k] / eta**2
                kernel[j, m] += kappa * B[m] * np.conj(B[n]) / eta
            pulse[j] = kernel[j, 0] + kernel[j, 1]
            continue
        pref = _residue_prefactor(mu, s, j)
        survival[j] = pref * np.sum(c / (mu[j] - s))
        for m in range(2):
            terms = sum(
                B[m] * np.conj(B[n]) / (mu[j] - lam[m] - np.conj(lam[n]))
                for n in range(2)
            )
            kernel[j, m] = kappa * pref * terms
        pulse[j] = kappa * pref * sum(
            B[m] * np.conj(B[n]) / (mu[j] - lam[m] - np.conj(lam[n]))
            for m in range(2)
            for n in range(2)
        )

    return mu, survival, pulse, kernel, pinned, snapped


def _bypass_tables(es: EigenSystem):
    """Factorized tables for gamma_p = 0.

    Without dephasing the survival is exactly |alpha0|^2 and the kernel is
    the rank-1 product kappa * beta0(u) * conj(beta0(u')), so the four pole
    slots are the pair sums lambda_m + conj(lambda_n) with product weights.
    """
    mu = decay_pair_poles(es)
    survival = survival_pair_weights(es)

    kappa = es.params.kappa
    B = es.B
    pairs = ((0, 0), (0, 1), (1, 0), (1, 1))
    kernel = np.zeros((4, 2), dtype=complex)
    pulse = np.empty(4, dtype=complex)
    for k, (m, n) in enumerate(pairs):
        weight = kappa * B[m] * np.conj(B[n])
        kernel[k, m] = weight
        pulse[k] = weight
    # Duplicated pole slots (e.g. any resonant case) are fine here: nothing
    # in the factorized tables divides by the slot gaps.
    return mu, survival, pulse, kernel


def _decoupled_tables(es: EigenSystem):
    """g = 0 trivial limit: the emitter only decays through gamma.

    The cavity is never populated, so the photon tables vanish and the
    survival has the single decay mode exp(-gamma t).  The remaining pole
    slots are filled with the other relaxation modes of the decoupled
    system so the pole set still matches the 4x4 generator spectrum.
    """
    p = es.params
    halfw = 0.5 * (p.gamma + p.kappa) + p.gamma_p
    mu = np.array(
        [
            -p.gamma + 0.0j,
            -halfw - 1j * p.detuning,
            -halfw + 1j * p.detuning,
            -p.kappa + 0.0j,
        ]
    )
    survival = np.zeros(4, dtype=complex)
    survival[0] = 1.0
    pulse = np.zeros(4, dtype=complex)
    kernel = np.zeros((4, 2), dtype=complex)
    return mu, survival, pulse, kernel


def solve_poles(es: EigenSystem, gamma_p: float) -> PoleSystem:
    """Build the PoleSystem for the eigen system at dephasing rate gamma_p.

    Raises RepeatedPoles when two genuine roots come closer than 1e-9 of
    the pole scale; those parameter points are measure-zero and should be
    perturbed.  Roots coinciding with pole targets (the pinned zero-residue
    root at a duplicated target, and snapped unresolvable roots) are
    handled by exact limit formulas instead.
    """
    p = es.params
    pinned = np.zeros(4, dtype=bool)
    snapped = np.zeros(4, dtype=bool)
    if p.g_zero:
        mu, survival, pulse, kernel = _decoupled_tables(es)
        bypass = True
    elif gamma_p < BYPASS_RTOL * max(p.g, p.kappa):
        mu, survival, pulse, kernel = _bypass_tables(es)
        bypass = True
    else:
        mu, survival, pulse, kernel, pinned, snapped = _dephasing_tables(es, gamma_p)
        bypass = False

    idx = _order(mu)
    return PoleSystem(
        poles=mu[idx],
        survival_weights=survival[idx],
        pulse_weights=pulse[idx],
        kernel_weights=kernel[idx],
        eigen=es,
        gamma_p=float(gamma_p),
        bypass=bypass,
        pinned=pinned[idx],
        snapped=snapped[idx],
    )


def survival_residues(ps: PoleSystem) -> np.ndarray:
    """Weights of exp(mu_j t) in the survival probability; they sum to 1."""
    return ps.survival_weights.copy()


def pulse_residues(ps: PoleSystem) -> np.ndarray:
    """Weights of exp(mu_j tau) in the pulse intensity f(tau)."""
    return ps.pulse_weights.copy()


def dm_residues(ps: PoleSystem) -> np.ndarray:
    """(4, 2) kernel weight table; row sums reproduce the pulse weights."""
    return ps.kernel_weights.copy()


def pole_equation_residual(ps: PoleSystem) -> np.ndarray:
    """|1 - 2 gamma_p L(mu_j)| for each genuine root.

    Returns zeros for bypass systems and for pinned roots (those sit on a
    duplicated pole target where the transform itself diverges but the
    cleared polynomial vanishes identically).
    """
    if ps.bypass:
        return np.zeros(4)
    s = decay_pair_poles(ps.eigen)
    c = survival_pair_weights(ps.eigen)
    out = np.zeros(4)
    for j, z in enumerate(ps.poles):
        if not (ps.pinned[j] or ps.snapped[j]):
            out[j] = abs(1.0 - 2.0 * ps.gamma_p * np.sum(c / (z - s)))
    return out


def match_to_previous(previous: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Permutation aligning `current` poles to `previous` by proximity.

    Used to keep root labels continuous along parameter sweeps; standalone
    calls rely on the deterministic ordering instead.
    """
    cost = np.abs(previous[:, None] - current[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols
