"""Bound states below the continuum and the fixed-point eigencurve criterion.

A bound state at energy E < 0 exists exactly when some eigencurve satisfies
kappa_n(E) = E.  Since every kappa_n is nonincreasing on the negative half
axis while the identity grows, each branch crosses the diagonal at most once,
and the number of bound states equals the number of eigencurves that are
still negative at E = 0.  Counting therefore needs a single Gram matrix at
the threshold; locating the energies is one-dimensional bisection per branch.

Embedded (positive-energy) candidates are handled separately: crossings of
kappa_n(E) = E on the principal-value family are reported together with the
modulus of sum_n c_n v_n(E*), which must vanish for a genuine embedded
eigenvector.  The scan never certifies anything, it only reports candidates
and their defects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import total_l2_norm_sq
from .quad import (DEFAULT_QUAD, NumericalError, gram_matrix, integrate_semiinf,
                   pv_matrix)
from .spectral import eigh, k_matrix, kappa_curve

__all__ = [
    "BoundState", "SolveReport", "CountResult", "IndependenceReport",
    "PositiveCandidate", "BracketError",
    "count_negative", "find_root", "bound_state", "solve_model", "residual",
    "independence_analysis", "positive_candidate_scan",
]


class BracketError(NumericalError):
    """No sign-changing bracket could be established for a root search."""


@dataclass(frozen=True)
class CountResult:
    count: int
    kappa_at_zero: np.ndarray
    indeterminate: tuple = ()


@dataclass(frozen=True)
class BoundState:
    """A normalized bound state below the continuum.

    energy: the eigenvalue E < 0.
    c: level amplitudes (length N), normalized together with the continuum
       part so that |c|^2 + continuum_norm_sq = 1.
    f_descriptor: callable giving the continuum amplitude
       f(omega) = -lambda * sum_n c_n v_n(omega) / (omega - E).
    continuum_norm_sq: integral of |f|^2 over the half line.
    total_norm_sq: |c|^2 + continuum_norm_sq (1 by construction).
    branch_index: which eigencurve produced the state (1-based).
    bracket: final bisection interval.
    degenerate_partners: other branch indices within degeneracy tolerance.
    """

    energy: float
    c: np.ndarray
    f_descriptor: object
    continuum_norm_sq: float
    total_norm_sq: float
    branch_index: int
    bracket: tuple = (float("nan"), float("nan"))
    degenerate_partners: tuple = ()


@dataclass(frozen=True)
class SolveReport:
    count: int
    states: tuple
    kappa_at_zero: np.ndarray
    brackets: tuple
    indeterminate: tuple = ()


@dataclass(frozen=True)
class IndependenceReport:
    """Effective number of independent form factors at a reference energy.

    n_independent is the numerical rank of the Gram matrix; at most this many
    eigencurves can be pushed below the bare spectrum no matter how large the
    coupling grows.
    """

    n_independent: int
    gram_eigenvalues: np.ndarray
    e_ref: float
    rank_tol: float


@dataclass(frozen=True)
class PositiveCandidate:
    branch_index: int
    energy: float
    zero_defect: float


def count_negative(model, settings=None, tol_zero: float = 1e-12) -> CountResult:
    """Count eigencurves negative at threshold, i.e. the bound states.

    Branches with |kappa_n(0)| <= tol_zero are flagged indeterminate and not
    counted; they sit within numerical resolution of the continuum edge.
    """
    point = eigh(k_matrix(model, gram_matrix(model, 0.0, settings)), 0.0)
    kappa = point.kappa
    indeterminate = tuple(int(i) + 1 for i in np.nonzero(np.abs(kappa) <= tol_zero)[0])
    count = int(np.count_nonzero(kappa < -tol_zero))
    return CountResult(count, kappa, indeterminate)


def _branch_gap(model, e, n, settings):
    """kappa_n(E) - E, the bisection objective for branch n (1-based)."""
    point = eigh(k_matrix(model, gram_matrix(model, e, settings)), e)
    return float(point.kappa[n - 1]) - e


def _find_root_bracketed(model, n, settings, tol, max_doublings):
    g0 = _branch_gap(model, 0.0, n, settings)
    if g0 >= 0.0:
        raise BracketError(
            f"branch {n} does not cross the diagonal: kappa_{n}(0) = {g0:+.3e} >= 0")
    # kappa_n >= omega_1 - lambda^2 tr S(E) and tr S(E) <= sum_n l2 / |E|
    # make this seed a guaranteed positive end once |E_lo| >= 1.
    lam_sq = model.coupling ** 2
    e_lo = min(model.levels[0], 0.0) - 1.0 - lam_sq * total_l2_norm_sq(model, settings)
    for _ in range(max_doublings):
        if _branch_gap(model, e_lo, n, settings) > 0.0:
            break
        e_lo *= 2.0
    else:
        raise BracketError(f"no positive end found for branch {n} down to E = {e_lo}")

    lo, hi = e_lo, 0.0
    for _ in range(240):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        g = _branch_gap(model, mid, n, settings)
        if g > 0.0:
            lo = mid
        elif g < 0.0:
            hi = mid
        else:
            return mid, (lo, hi)
        if hi - lo < tol and abs(g) < tol:
            break
    mid = 0.5 * (lo + hi)
    if hi - lo >= tol:
        raise NumericalError(
            f"bisection stalled on branch {n}: width {hi - lo:.3e} >= {tol}")
    return mid, (lo, hi)


def find_root(model, n, settings=None, *, tol: float = 1e-12,
              max_doublings: int = 60) -> float:
    """Bound-state energy on branch n (1-based) by bisection.

    The bracket starts at [min(omega_1, 0) - 1 - lambda^2 sum_n |v_n|^2, 0]
    and doubles leftward if needed; convergence requires both the bracket
    width and |kappa_n(E) - E| below tol.
    """
    root, _ = _find_root_bracketed(model, n, settings, tol, max_doublings)
    return root


def bound_state(model, n, e=None, settings=None) -> BoundState:
    """Assemble the normalized bound state on branch n.

    When e is omitted the branch energy is located first.  The level
    amplitudes come from the eigenvector of K(E) on that branch; the
    continuum weight is the adaptive quadrature of |f|^2.
    """
    bracket = (float("nan"), float("nan"))
    if e is None:
        e, bracket = _find_root_bracketed(model, n, settings, 1e-12, 60)
    e = float(e)
    if e >= 0.0:
        raise ValueError("bound states require E < 0")
    point = eigh(k_matrix(model, gram_matrix(model, e, settings)), e)
    idx = n - 1
    scale = max(point.operator_norm(), 1e-300)
    partners = tuple(int(m) + 1 for m in range(point.n)
                     if m != idx and abs(point.kappa[m] - point.kappa[idx]) <= 1e-12 * scale)
    c_raw = point.vectors[:, idx]

    lam = model.coupling
    factors = model.form_factors

    def level_sum(w):
        return sum(ci * f.value_scalar(w) for ci, f in zip(c_raw, factors))

    def density(w):
        amp = level_sum(w)
        d = w - e
        return lam * lam * (amp.real ** 2 + amp.imag ** 2) / (d * d)

    split = 10.0 * model.max_scale()
    scales = [f.scale for f in factors]
    continuum_raw, _ = integrate_semiinf(density, settings, breakpoints=scales,
                                         split=split)
    total_raw = 1.0 + continuum_raw
    c = c_raw / math.sqrt(total_raw)
    cont = continuum_raw / total_raw

    def f_descriptor(w, _c=c, _e=e, _lam=lam, _factors=factors):
        amp = sum(ci * f.value_scalar(w) for ci, f in zip(_c, _factors))
        return -_lam * amp / (w - _e)

    return BoundState(e, c, f_descriptor, cont, float(np.vdot(c, c).real) + cont,
                      n, bracket, partners)


def residual(model, state: BoundState, settings=None) -> float:
    """Norm of (K(E) - E) c, recomputed from scratch at the state's energy.

    Useful with independent (typically tighter) quadrature settings as an
    end-to-end consistency check of a solved state.
    """
    k = k_matrix(model, gram_matrix(model, state.energy, settings))
    c = state.c
    nrm = np.linalg.norm(c)
    if nrm == 0.0:
        return float("nan")
    return float(np.linalg.norm(k @ c - state.energy * c) / nrm)


def solve_model(model, settings=None, *, with_states: bool = True) -> SolveReport:
    """Count and (optionally) solve every bound state of the model."""
    counted = count_negative(model, settings)
    states = []
    brackets = []
    if with_states:
        for n in range(1, counted.count + 1):
            st = bound_state(model, n, None, settings)
            states.append(st)
            brackets.append(st.bracket)
    return SolveReport(counted.count, tuple(states), counted.kappa_at_zero,
                       tuple(brackets), counted.indeterminate)


def independence_analysis(model, e_ref, settings=None, *,
                          rank_tol: float = 1e-10) -> IndependenceReport:
    """Numerical rank of the Gram matrix at a reference energy E_ref < 0."""
    e_ref = float(e_ref)
    if e_ref >= 0.0:
        raise ValueError("independence analysis needs E_ref < 0")
    s = gram_matrix(model, e_ref, settings)
    sigma = np.linalg.eigvalsh(s.entries)
    top = float(sigma[-1]) if sigma.size else 0.0
    rank = int(np.count_nonzero(sigma > rank_tol * max(top, 0.0)))
    return IndependenceReport(rank, sigma, e_ref, rank_tol)


def positive_candidate_scan(model, e_grid, settings=None, pv=None):
    """Scan E > 0 for crossings kappa_n(E) = E and report their defects.

    Returns PositiveCandidate records: branch, refined crossing energy, and
    zero_defect = |sum_n c_n v_n(E*)| with c the branch eigenvector at the
    crossing.  A genuine embedded eigenvalue needs a vanishing defect; the
    scan reports, it does not certify.
    """
    grid = np.sort(np.atleast_1d(np.asarray(e_grid, dtype=float)))
    if np.any(grid <= 0.0):
        raise ValueError("positive_candidate_scan needs a strictly positive grid")
    points = kappa_curve(model, grid, kind="D", settings=settings, pv=pv)
    gaps = np.array([p.kappa - p.e for p in points])

    def branch_gap(e, n):
        pt = kappa_curve(model, [e], kind="D", settings=settings, pv=pv)[0]
        return float(pt.kappa[n - 1]) - e, pt

    out = []
    for n in range(1, model.n_levels + 1):
        col = gaps[:, n - 1]
        for i in range(len(grid) - 1):
            a, b = col[i], col[i + 1]
            if a == 0.0:
                lo = hi = grid[i]
            elif a * b < 0.0:
                lo, hi = grid[i], grid[i + 1]
            else:
                continue
            glo = a
            for _ in range(80):
                if hi - lo <= 1e-11 * max(1.0, hi):
                    break
                mid = 0.5 * (lo + hi)
                gm, _ = branch_gap(mid, n)
                if gm == 0.0:
                    lo = hi = mid
                    break
                if (gm > 0.0) == (glo > 0.0):
                    lo, glo = mid, gm
                else:
                    hi = mid
            e_star = 0.5 * (lo + hi)
            _, pt = branch_gap(e_star, n)
            c = pt.vectors[:, n - 1]
            amp = sum(ci * f.value_scalar(e_star)
                      for ci, f in zip(c, model.form_factors))
            out.append(PositiveCandidate(n, float(e_star), abs(amp)))
    return out
