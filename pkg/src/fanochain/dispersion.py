"""Discrete solutions of the nonlinear dispersion relation.

The eigenvalue condition is

    eta(z) = z - e_d - g^2 * Sigma(z) = 0

with the self-energy evaluated on the appropriate Riemann sheet.  Clearing
the square root turns this into a real polynomial (degree 2*n_d for the
semi-infinite chain, quartic for the infinite one) whose root set is the
union of the roots of eta on *both* sheets.  Every polynomial root is
therefore Newton-polished on eta itself, which restores full precision,
decides the sheet, and rejects anything the squaring step invented.

Generic census for the semi-infinite chain: n_d - 1 decaying resonances in
the lower half of sheet II, their growing conjugate partners above, and
two real solutions pinned near the band edges.  The real pair sits on
sheet I (true bound states) only when the impurity level is pushed far
enough outside the band; for an in-band impurity the finite band-edge
self-energy Sigma(+-1) = +-2*n_d*v^2 leaves eta nonzero outside the band
on sheet I and the pair lives on sheet II instead (virtual states).  Both
placements are detected and reported honestly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import BranchPointError, ConvergenceError, ModelError, RootCountError
from .model import ChainModel, validate
from .selfenergy import Sheet, SheetedEnergy, self_energy, self_energy_deriv

#: Default acceptance threshold on |eta| at a reported root.
ROOT_TOL = 1e-12

#: Roots closer than this are one root reported twice by the polynomial.
DEDUP_TOL = 1e-9

#: Pairs surviving dedup but closer than this are flagged near-degenerate.
NEAR_DEGENERATE_TOL = 1e-6

#: |Im z| below this counts as a real *polished* root.
REAL_TOL = 1e-9

#: Companion-matrix candidates closer than this to the real axis carry no
#: trustworthy sign information (near-double roots smear by ~sqrt(eps)),
#: so such candidates are polished from both conjugate seeds.
CANDIDATE_REAL_TOL = 1e-6


class StateClass(enum.Enum):
    """Classification of a discrete eigenvalue."""

    BOUND_I = "boundI"          # real, outside the band, physical sheet
    BOUND_II = "boundII"        # real, outside the band, second sheet (virtual)
    RESONANCE = "resonance"     # Im z < 0, second sheet
    ANTIRESONANCE = "antiresonance"  # Im z > 0, conjugate continuation
    BIC = "bic"                 # real, inside the band, zero width


@dataclass(frozen=True)
class DiscreteState:
    """One discrete eigenvalue record."""

    z: complex
    sheet: Sheet
    state_class: StateClass
    residual: float
    norm: complex | None = None
    near_degenerate: bool = False
    label: str | None = None

    @property
    def epsilon(self) -> float:
        """Resonance position Re z."""
        return self.z.real

    @property
    def gamma(self) -> float:
        """Decay rate, -Im z (positive for resonances)."""
        return -self.z.imag

    def sheeted(self) -> SheetedEnergy:
        return SheetedEnergy(self.z, self.sheet)


def bic_energies(model: ChainModel) -> list[float]:
    """Energies where the coupling vanishes inside the band.

    These are -cos(pi*k/n_d) for k = 1 .. n_d - 1, where the impurity
    decouples by interference with the wall.  The infinite chain has none.
    """
    validate(model)
    if not model.is_semi_infinite:
        raise ModelError("no BIC in the infinite chain")
    n = model.n_d
    return sorted(-math.cos(math.pi * k / n) for k in range(1, n))


def eta(model: ChainModel, z: SheetedEnergy) -> complex:
    """Dispersion function z - e_d - g^2 Sigma(z) on the tagged sheet."""
    return z.value - model.e_d - model.g**2 * self_energy(model, z)


def eta_deriv(model: ChainModel, z: SheetedEnergy, order: int = 1) -> complex:
    """d(eta)/dz (order 1) or d^2(eta)/dz^2 (order 2)."""
    if order == 1:
        return 1.0 - model.g**2 * self_energy_deriv(model, z, 1)
    if order == 2:
        return -model.g**2 * self_energy_deriv(model, z, 2)
    raise ValueError(f"order must be 1 or 2, got {order}")


def polynomial_coefficients(model: ChainModel) -> np.ndarray:
    """Real coefficients (descending powers) of the squared dispersion relation.

    Multiplying eta by its second-sheet partner and clearing denominators
    gives, after the binomial identities collapse, the polynomial

        (z - e_d)^2 + 2*G*(z - e_d)*P(z) + 2*G^2*W(z) = 0,   G = g^2 v^2,

    with

        P(z) = sum_{m=0}^{n_d-1} C(2 n_d, 2m+1) (-z)^(2 n_d - 2m - 1) (z^2-1)^m,
        W(z) = sum_{m=0}^{n_d-1} z^(2m)
             + sum_{m=1}^{n_d}   C(2 n_d, 2m)   (-z)^(2 n_d - 2m)   (z^2-1)^(m-1).

    The infinite chain squares directly to (z - e_d)^2 (z^2 - 1) - G^2.
    Leading zeros (the g = 0 degeneration) are trimmed.
    """
    validate(model)
    G = model.g**2 * model.v**2
    if not model.is_semi_infinite:
        quartic = npoly.polyfromroots([model.e_d, model.e_d, 1.0, -1.0])
        quartic[0] -= G * G
        return quartic[::-1].copy()

    n = model.n_d
    z2m1 = np.array([-1.0, 0.0, 1.0])  # z^2 - 1, ascending
    p_odd = np.zeros(1)
    for m in range(n):
        term = npoly.polypow([0.0, -1.0], 2 * n - 2 * m - 1) * math.comb(2 * n, 2 * m + 1)
        p_odd = npoly.polyadd(p_odd, npoly.polymul(term, npoly.polypow(z2m1, m)))
    w_even = np.zeros(2 * n - 1)
    w_even[0 : 2 * n - 1 : 2] = 1.0  # sum z^(2m), m = 0 .. n_d-1
    for m in range(1, n + 1):
        term = npoly.polypow([0.0, -1.0], 2 * n - 2 * m) * math.comb(2 * n, 2 * m)
        w_even = npoly.polyadd(w_even, npoly.polymul(term, npoly.polypow(z2m1, m - 1)))
    z_minus_ed = np.array([-model.e_d, 1.0])
    total = npoly.polymul(z_minus_ed, z_minus_ed)
    total = npoly.polyadd(total, 2.0 * G * npoly.polymul(z_minus_ed, p_odd))
    total = npoly.polyadd(total, 2.0 * G * G * w_even)
    coeffs = total[::-1]
    nonzero = np.nonzero(coeffs)[0]
    return coeffs[nonzero[0] :].copy()


def newton_polish(
    model: ChainModel,
    z0: complex,
    sheet: Sheet,
    tol: float = ROOT_TOL,
    max_iter: int = 80,
) -> tuple[complex, float]:
    """Newton iteration on eta from z0 on a fixed sheet.

    Returns the final iterate and |eta| there.  Raises ConvergenceError
    (with the iterate trace) if the residual never drops below tol.
    """
    z = complex(z0)
    trace = [z]
    best_z, best_res = z, float("inf")
    for _ in range(max_iter):
        try:
            f = eta(model, SheetedEnergy(z, sheet))
        except BranchPointError:
            z += 1e-14 + 1e-14j
            f = eta(model, SheetedEnergy(z, sheet))
        res = abs(f)
        if res < best_res:
            best_z, best_res = z, res
        if res < tol:
            return z, res
        fp = eta_deriv(model, SheetedEnergy(z, sheet))
        if fp == 0:
            break
        z = z - f / fp
        trace.append(z)
    if best_res < tol:
        return best_z, best_res
    raise ConvergenceError(
        f"Newton on eta stalled at |eta| = {best_res:.3e} (sheet {sheet.name})",
        trace=trace,
    )


def _try_polish(model, z0, sheet, tol, capture_radius=1e-3):
    """Polish, but reject convergence to *some other* root far from the seed.

    Companion-matrix candidates are accurate to far better than the
    radius, so a polish that travels is one that drained into a
    neighbouring root (e.g. the bound/virtual twin across the cut).
    """
    try:
        z, res = newton_polish(model, z0, sheet, tol)
    except ConvergenceError:
        return None
    if abs(z - z0) > capture_radius:
        return None
    return z, res


def _make_real(model, z, sheet, tol):
    """Re-polish a near-real root with a real Newton step so Im is exactly 0."""
    x = z.real
    for _ in range(40):
        f = eta(model, SheetedEnergy(complex(x, 0.0), sheet))
        if abs(f) < tol:
            break
        fp = eta_deriv(model, SheetedEnergy(complex(x, 0.0), sheet))
        # eta is real on the real axis outside the band on either sheet
        x = x - (f / fp).real
    f = eta(model, SheetedEnergy(complex(x, 0.0), sheet))
    return complex(x, 0.0), abs(f)


def discrete_states(
    model: ChainModel,
    root_tol: float = ROOT_TOL,
    include_antiresonances: bool | None = None,
) -> list[DiscreteState]:
    """All discrete eigenvalues: polynomial roots polished on eta.

    The candidate set comes from the companion-matrix roots of
    :func:`polynomial_coefficients`.  Each candidate is polished by Newton
    iteration on eta with the sheet chosen by location: real candidates
    outside the band are tried on sheet I first and fall back to sheet II
    (virtual state); lower-half-plane candidates are resonances on sheet
    II; upper-half-plane candidates are anti-resonance partners, verified
    against the conjugate of some resonance before being accepted.

    By default the anti-resonances are dropped from the semi-infinite
    output (leaving the n_d + 1 physical solutions) and kept for the
    infinite chain (whose four roots are conventionally quoted together).
    Pass ``include_antiresonances`` to override.

    Raises
    ------
    RootCountError
        If polishing/filtering loses candidates relative to the polynomial
        degree, leaves a resonance without its conjugate partner, or
        otherwise cannot account for every root.
    """
    validate(model)
    if include_antiresonances is None:
        include_antiresonances = not model.is_semi_infinite

    if model.g == 0.0:
        # Decoupled impurity: the single eigenvalue sits at e_d.
        inside = abs(model.e_d) < 1.0
        cls = StateClass.BIC if inside else StateClass.BOUND_I
        state = DiscreteState(
            z=complex(model.e_d, 0.0),
            sheet=Sheet.I,
            state_class=cls,
            residual=0.0,
        )
        return [state]

    coeffs = polynomial_coefficients(model)
    candidates = np.roots(coeffs)

    bics = set()
    if model.is_semi_infinite:
        bics = {e for e in bic_energies(model) if abs(e - model.e_d) < 1e-12}

    accepted: list[DiscreteState] = []
    rejected: list[tuple[complex, float]] = []

    for r in candidates:
        r = complex(r)
        if bics and min(abs(r - e) for e in bics) < 1e-6:
            # Impurity level exactly on a BIC: Sigma vanishes there, so
            # z = e_d solves eta on both sheets; the polynomial reports a
            # double root (with sqrt(eps) fuzz) that collapses to the one
            # zero-width state.
            e_b = min(bics, key=lambda e: abs(r - e))
            accepted.append(
                DiscreteState(
                    z=complex(e_b, 0.0),
                    sheet=Sheet.I,
                    state_class=StateClass.BIC,
                    residual=abs(eta(model, SheetedEnergy(complex(e_b, 0.0), Sheet.I))),
                )
            )
            continue
        if abs(r.imag) < CANDIDATE_REAL_TOL:
            if abs(r.real) > 1.0:
                placed = False
                for sheet in (Sheet.I, Sheet.II):
                    hit = _try_polish(
                        model, complex(r.real, 0.0), sheet, root_tol, capture_radius=1e-4
                    )
                    if hit is None:
                        continue
                    z, res = _make_real(model, hit[0], sheet, root_tol)
                    if abs(z.real) <= 1.0 or res >= root_tol:
                        continue
                    cls = StateClass.BOUND_I if sheet is Sheet.I else StateClass.BOUND_II
                    accepted.append(DiscreteState(z=z, sheet=sheet, state_class=cls, residual=res))
                    placed = True
                    break
                if not placed:
                    rejected.append((r, float("nan")))
            else:
                # In-band candidate with an unresolved imaginary part: at
                # weak coupling the resonance/anti-resonance pair hugs the
                # real axis closer than the companion-matrix accuracy.
                # Polish both members from conjugate seeds; dedup cleans up.
                off = max(abs(r.imag), 1e-10)
                placed = False
                for seed, cls in (
                    (complex(r.real, -off), StateClass.RESONANCE),
                    (complex(r.real, +off), StateClass.ANTIRESONANCE),
                ):
                    hit = _try_polish(model, seed, Sheet.II, root_tol)
                    if hit is None:
                        continue
                    z, res = hit
                    if (cls is StateClass.RESONANCE) != (z.imag < 0):
                        continue
                    accepted.append(
                        DiscreteState(z=z, sheet=Sheet.II, state_class=cls, residual=res)
                    )
                    placed = True
                if not placed:
                    rejected.append((r, float("nan")))
        elif r.imag < 0:
            hit = _try_polish(model, r, Sheet.II, root_tol)
            if hit is None:
                rejected.append((r, float("nan")))
                continue
            z, res = hit
            accepted.append(
                DiscreteState(z=z, sheet=Sheet.II, state_class=StateClass.RESONANCE, residual=res)
            )
        else:
            hit = _try_polish(model, r, Sheet.II, root_tol)
            if hit is None:
                rejected.append((r, float("nan")))
                continue
            z, res = hit
            accepted.append(
                DiscreteState(
                    z=z, sheet=Sheet.II, state_class=StateClass.ANTIRESONANCE, residual=res
                )
            )

    accepted = _dedup(accepted)
    accepted = _flag_near_degenerate(accepted)

    resonances = [s for s in accepted if s.state_class is StateClass.RESONANCE]
    antis = [s for s in accepted if s.state_class is StateClass.ANTIRESONANCE]

    # Every anti-resonance must be the conjugate partner of a resonance;
    # anything unmatched is a squaring artifact that slipped through.
    # Tolerance covers the position error of a near-double root, where
    # |eta| < tol only pins z to within sqrt(tol).
    conj_tol = max(1e-7, 10.0 * math.sqrt(root_tol))
    for a in antis:
        if not any(abs(a.z - s.z.conjugate()) < conj_tol for s in resonances):
            rejected.append((a.z, a.residual))

    if rejected:
        raise RootCountError(
            f"{len(rejected)} candidate roots failed eta-polishing/classification",
            candidates=[(z, res) for z, res in rejected],
        )

    # Structural audit against the polynomial degree: every candidate must
    # land somewhere, and a BIC absorbs the double root it came from.
    # (The physics census -- n_d - 1 resonances plus two real solutions for
    # an in-band impurity level -- is parameter-dependent: outside the band
    # at weak coupling a resonance pair degenerates into two extra real
    # virtual states.  That census is asserted where it holds, not here.)
    degree = 2 * model.n_d if model.is_semi_infinite else 4
    expected_total = degree - len(bics)
    if len(accepted) != expected_total:
        raise RootCountError(
            f"polynomial of degree {degree} yielded {len(accepted)} classified "
            f"states (expected {expected_total})",
            candidates=[(s.z, s.residual) for s in accepted],
        )
    if len(resonances) != len(antis):
        raise RootCountError(
            f"unpaired resonances: {len(resonances)} vs {len(antis)} anti-resonances",
            candidates=[(s.z, s.residual) for s in accepted],
        )

    if not include_antiresonances:
        accepted = [s for s in accepted if s.state_class is not StateClass.ANTIRESONANCE]

    return _sort_and_label(accepted)


def _dedup(states: list[DiscreteState]) -> list[DiscreteState]:
    out: list[DiscreteState] = []
    for s in states:
        dup = next(
            (t for t in out if t.state_class is s.state_class and abs(t.z - s.z) < DEDUP_TOL),
            None,
        )
        if dup is None:
            out.append(s)
    return out


def _flag_near_degenerate(states: list[DiscreteState]) -> list[DiscreteState]:
    flagged = list(states)
    for i in range(len(flagged)):
        for j in range(i + 1, len(flagged)):
            a, b = flagged[i], flagged[j]
            if a.state_class is b.state_class and abs(a.z - b.z) < NEAR_DEGENERATE_TOL:
                flagged[i] = replace(a, near_degenerate=True)
                flagged[j] = replace(b, near_degenerate=True)
    return flagged


_ROMAN = ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x"]


def roman_label(index: int) -> str:
    return _ROMAN[index] if index < len(_ROMAN) else f"r{index + 1}"


def _sort_and_label(states: list[DiscreteState]) -> list[DiscreteState]:
    """Deterministic order and branch labels.

    Resonances are labelled (i), (ii), ... by ascending width, matching
    how the narrowest (dominant) state is singled out in spectra; real
    solutions get b1, b2, ... by ascending energy, anti-resonances a1, ...
    """
    resonances = sorted(
        (s for s in states if s.state_class is StateClass.RESONANCE),
        key=lambda s: (s.gamma, s.epsilon),
    )
    bics = sorted((s for s in states if s.state_class is StateClass.BIC), key=lambda s: s.epsilon)
    reals = sorted(
        (s for s in states if s.state_class in (StateClass.BOUND_I, StateClass.BOUND_II)),
        key=lambda s: s.epsilon,
    )
    antis = sorted(
        (s for s in states if s.state_class is StateClass.ANTIRESONANCE),
        key=lambda s: (-s.z.imag, s.epsilon),
    )
    out = []
    for idx, s in enumerate(resonances):
        out.append(replace(s, label=roman_label(idx)))
    for idx, s in enumerate(bics):
        out.append(replace(s, label=f"bic{idx + 1}"))
    for idx, s in enumerate(reals):
        out.append(replace(s, label=f"b{idx + 1}"))
    for idx, s in enumerate(antis):
        out.append(replace(s, label=f"a{idx + 1}"))
    return out


def polish_seeds(
    model: ChainModel,
    seeds: list[tuple[complex, Sheet]],
    root_tol: float = ROOT_TOL,
) -> list[DiscreteState]:
    """Newton-polish user-supplied (z, sheet) seeds and classify the results.

    Used by the CLI round trip, where previously exported roots are
    re-ingested verbatim.
    """
    validate(model)
    out = []
    for z0, sheet in seeds:
        z, res = newton_polish(model, z0, sheet, root_tol)
        if abs(z.imag) < REAL_TOL:
            z = complex(z.real, 0.0)
            if abs(z.real) > 1.0:
                cls = StateClass.BOUND_I if sheet is Sheet.I else StateClass.BOUND_II
            else:
                cls = StateClass.BIC
        elif z.imag < 0:
            cls = StateClass.RESONANCE
        else:
            cls = StateClass.ANTIRESONANCE
        out.append(DiscreteState(z=z, sheet=sheet, state_class=cls, residual=res))
    return _sort_and_label(_flag_near_degenerate(_dedup(out)))
