import math

import numpy as np
import pytest

from fanochain import (
    ChainModel,
    ModelError,
    Sheet,
    SheetedEnergy,
    StateClass,
    bic_energies,
    discrete_states,
    eta,
    polynomial_coefficients,
)
from fanochain.dispersion import newton_polish, polish_seeds
from oracles import sigma_quadrature, winding_number

I, II = Sheet.I, Sheet.II


def classes(states):
    out = {}
    for s in states:
        out[s.state_class] = out.get(s.state_class, 0) + 1
    return out


# ----------------------------------------------------------------- bic points


def test_bic_nd4(semi_model):
    got = bic_energies(semi_model)
    expected = [-1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)]
    assert got == pytest.approx(expected, abs=1e-14)


def test_bic_nd2():
    m = ChainModel.semi_infinite(2, -0.5, 0.2)
    assert bic_energies(m) == pytest.approx([0.0], abs=1e-14)


def test_bic_nd1_empty():
    m = ChainModel.semi_infinite(1, -0.5, 0.2)
    assert bic_energies(m) == []


def test_bic_infinite_rejected(infinite_model):
    with pytest.raises(ModelError, match="infinite"):
        bic_energies(infinite_model)


# ----------------------------------------------------------------- polynomial


def test_polynomial_g_zero_root_at_ed():
    m = ChainModel.semi_infinite(4, -0.37, 0.0)
    coeffs = polynomial_coefficients(m)
    roots = np.roots(coeffs)
    assert sorted(np.real(roots)) == pytest.approx([-0.37, -0.37], abs=1e-12)


def test_polynomial_infinite_expansion():
    m = ChainModel.infinite(-0.6, 0.2, v=1.1)
    big_g = m.g**2 * m.v**2
    expected = np.polynomial.polynomial.polyfromroots([m.e_d, m.e_d, 1.0, -1.0])[::-1]
    expected = expected.copy()
    expected[-1] -= big_g**2
    assert polynomial_coefficients(m) == pytest.approx(expected)


def test_polynomial_nd1_matches_direct_squaring():
    # z - e_d = 2 g^2 v^2 (z - s)  squares to
    # (z(1 - 2G) - e_d + 2G... )^2 = 4 G^2 (z^2 - 1), G = g^2 v^2
    m = ChainModel.semi_infinite(1, -0.3, 0.25, v=1.2)
    G = m.g**2 * m.v**2
    # ((1-2G) z - e_d)^2 - 4 G^2 (z^2 - 1) expanded, descending
    a = 1.0 - 2.0 * G
    manual = np.array(
        [a * a - 4 * G * G, -2.0 * a * m.e_d, m.e_d**2 + 4.0 * G * G]
    )
    got = polynomial_coefficients(m)
    assert len(got) == 3
    assert got / got[0] == pytest.approx(manual / manual[0], rel=1e-12)


def test_polynomial_roots_solve_eta_on_some_sheet(semi_model):
    coeffs = polynomial_coefficients(semi_model)
    for r in np.roots(coeffs):
        vals = [abs(eta(semi_model, SheetedEnergy(complex(r), sheet))) for sheet in (I, II)]
        assert min(vals) < 1e-6


def test_polynomial_degree_2nd():
    for n_d in (1, 2, 3, 5, 6):
        m = ChainModel.semi_infinite(n_d, -0.4, 0.17)
        assert len(polynomial_coefficients(m)) == 2 * n_d + 1


# ------------------------------------------------------------------------ eta


def test_eta_at_root_is_zero(semi_model):
    for s in discrete_states(semi_model):
        assert abs(eta(semi_model, s.sheeted())) < 1e-12


def test_eta_g_zero():
    m = ChainModel.semi_infinite(4, -0.5, 0.0)
    assert eta(m, SheetedEnergy(-0.5 + 0j, I)) == 0.0


def test_eta_against_quadrature(semi_model):
    # frozen: 2 - e_d - g^2 * Sigma(2) with Sigma from the quadrature oracle
    expected = 2.0 - semi_model.e_d - semi_model.g**2 * sigma_quadrature(semi_model, 2.0)
    assert expected == pytest.approx(2.4769066028799354, rel=1e-12)
    assert eta(semi_model, SheetedEnergy(2.0 + 0j, I)) == pytest.approx(expected, rel=1e-10)


# -------------------------------------------------------------- state finding


def test_counts_flagship(semi_model):
    states = discrete_states(semi_model)
    by = classes(states)
    assert by[StateClass.RESONANCE] == 3
    assert by.get(StateClass.BOUND_I, 0) + by.get(StateClass.BOUND_II, 0) == 2
    assert len(states) == 5


def test_flagship_resonance_positions(semi_model):
    # frozen from the polished solve; Newton on eta verifies independently
    res = sorted(
        (s.z for s in discrete_states(semi_model) if s.state_class is StateClass.RESONANCE),
        key=lambda z: z.real,
    )
    expected = [
        -0.5704389029971567 - 0.0411459769011912j,
        -0.3054482904852066 - 0.2268410389813878j,
        0.6011739860845702 - 0.3527705881174854j,
    ]
    assert res == pytest.approx(expected, abs=1e-9)


def test_every_root_verified_on_declared_sheet(semi_model, infinite_model):
    for m in (semi_model, infinite_model):
        for s in discrete_states(m):
            assert s.residual < 1e-12
            assert abs(eta(m, s.sheeted())) < 1e-12


def test_resonances_have_positive_gamma_on_sheet_two(semi_model):
    for s in discrete_states(semi_model):
        if s.state_class is StateClass.RESONANCE:
            assert s.gamma > 0
            assert s.sheet is II


def test_count_law_on_grid():
    # generic points: away from BIC energies and from the thresholds
    # e_d = +-(1 - 2 n_d g^2 v^2) where a real root sits on a band edge
    for n_d in (2, 3, 4, 5):
        for g in (0.05, 0.1, 0.2, 0.3):
            for e_d in (-0.85, -0.55, -0.25, 0.35, 0.58):
                if min(abs(e_d - b) for b in bic_energies(ChainModel.semi_infinite(n_d, e_d, g))) < 1e-3:
                    continue
                states = discrete_states(ChainModel.semi_infinite(n_d, e_d, g))
                by = classes(states)
                assert by.get(StateClass.RESONANCE, 0) == n_d - 1, (n_d, g, e_d)
                n_real = by.get(StateClass.BOUND_I, 0) + by.get(StateClass.BOUND_II, 0)
                assert n_real == 2, (n_d, g, e_d)


def test_infinite_census(infinite_model):
    states = discrete_states(infinite_model)
    by = classes(states)
    assert by[StateClass.BOUND_I] == 2
    assert by[StateClass.RESONANCE] == 1
    assert by[StateClass.ANTIRESONANCE] == 1
    res = next(s for s in states if s.state_class is StateClass.RESONANCE)
    anti = next(s for s in states if s.state_class is StateClass.ANTIRESONANCE)
    assert res.z == pytest.approx(np.conj(anti.z), rel=1e-12)
    assert res.z.imag < 0


def test_true_bound_states_when_level_below_band():
    m = ChainModel.semi_infinite(4, -1.5, 0.2)
    states = discrete_states(m)
    bound_i = [s for s in states if s.state_class is StateClass.BOUND_I]
    assert len(bound_i) == 1
    assert bound_i[0].z.real < -1
    assert bound_i[0].sheet is I


def test_out_of_band_weak_coupling_virtual_pair():
    # outside the band at weak coupling a resonance pair sits on the
    # second-sheet real axis instead: 4 real solutions, 2 resonances,
    # including a virtual twin right below the physical bound state
    m = ChainModel.semi_infinite(4, -1.5, 1e-3)
    states = discrete_states(m)
    by = classes(states)
    assert by[StateClass.BOUND_I] == 1
    assert by[StateClass.BOUND_II] == 3
    assert by[StateClass.RESONANCE] == 2
    bound = next(s for s in states if s.state_class is StateClass.BOUND_I)
    twin = min(
        (s for s in states if s.state_class is StateClass.BOUND_II),
        key=lambda s: abs(s.z - bound.z),
    )
    assert abs(twin.z - bound.z) < 0.01
    assert twin.z != bound.z


def test_conjugation_property(semi_model):
    states = discrete_states(semi_model, include_antiresonances=True)
    res = [s.z for s in states if s.state_class is StateClass.RESONANCE]
    antis = [s.z for s in states if s.state_class is StateClass.ANTIRESONANCE]
    assert len(res) == len(antis) == 3
    for z in res:
        partner = min(antis, key=lambda a: abs(a - np.conj(z)))
        assert partner == pytest.approx(np.conj(z), abs=1e-10)
        # the conjugate satisfies the sheet-II dispersion relation directly
        assert abs(eta(semi_model, SheetedEnergy(np.conj(z), II))) < 1e-11


def test_mirror_symmetry():
    for e_d in (-0.55, -0.3, 0.15):
        for g in (0.1, 0.2):
            plus = discrete_states(ChainModel.semi_infinite(4, e_d, g))
            minus = discrete_states(ChainModel.semi_infinite(4, -e_d, g))
            rp = sorted(
                (s.z for s in plus if s.state_class is StateClass.RESONANCE),
                key=lambda z: z.real,
            )
            rm = sorted(
                (-np.conj(s.z) for s in minus if s.state_class is StateClass.RESONANCE),
                key=lambda z: z.real,
            )
            assert rp == pytest.approx(rm, abs=1e-10)


def test_small_g_analytic_root():
    m = ChainModel.semi_infinite(4, -0.5, 1e-6)
    states = discrete_states(m)
    analytic = min(
        (s for s in states if s.state_class is StateClass.RESONANCE),
        key=lambda s: abs(s.z - m.e_d),
    )
    # gamma = O(g^2): the boundary density at e_d fixes the prefactor
    assert analytic.gamma == pytest.approx(1.732e-12, rel=1e-2)
    assert abs(analytic.z.real - m.e_d) < 1e-11


def test_exact_bic_parameter_emits_bic_state():
    for e_b_index, n_d in ((0, 4), (1, 4), (0, 2)):
        e_b = bic_energies(ChainModel.semi_infinite(n_d, 0.0, 0.1))[e_b_index]
        m = ChainModel.semi_infinite(n_d, e_b, 0.2)
        states = discrete_states(m)
        by = classes(states)
        assert by.get(StateClass.BIC, 0) == 1
        bic = next(s for s in states if s.state_class is StateClass.BIC)
        assert bic.z == pytest.approx(complex(e_b, 0.0), abs=1e-12)
        assert bic.gamma == 0.0
        assert by.get(StateClass.RESONANCE, 0) == n_d - 2
        assert len(states) == n_d + 1


def test_g_zero_single_state():
    m = ChainModel.semi_infinite(4, -0.5, 0.0)
    states = discrete_states(m)
    assert len(states) == 1
    assert states[0].z == pytest.approx(-0.5 + 0j)


def test_near_ep_pair_flagged():
    # just off the known coalescence point the two close resonances come
    # out individually but are marked when within the degeneracy window
    m = ChainModel.semi_infinite(4, -0.39819697427829692, 0.17284479822974877)
    states = discrete_states(m)
    flagged = [s for s in states if s.near_degenerate]
    assert len(flagged) == 2
    assert all(s.state_class is StateClass.RESONANCE for s in flagged)


def test_labels_by_ascending_width(semi_model):
    res = [s for s in discrete_states(semi_model) if s.state_class is StateClass.RESONANCE]
    labels = {s.label: s.gamma for s in res}
    assert set(labels) == {"i", "ii", "iii"}
    assert labels["i"] < labels["ii"] < labels["iii"]


def test_polish_seeds_round_trip(semi_model):
    states = discrete_states(semi_model)
    seeds = [(s.z, s.sheet) for s in states]
    again = polish_seeds(semi_model, seeds)
    assert len(again) == len(states)
    for a, b in zip(
        sorted(states, key=lambda s: (s.z.real, s.z.imag)),
        sorted(again, key=lambda s: (s.z.real, s.z.imag)),
    ):
        assert a.z == pytest.approx(b.z, abs=1e-12)
        assert a.state_class is b.state_class


def test_newton_polish_reports_trace_on_failure(semi_model):
    from fanochain import ConvergenceError

    with pytest.raises(ConvergenceError) as info:
        # absurd tolerance cannot be met; the trace must come back
        newton_polish(semi_model, 0.5 - 0.2j, II, tol=1e-40, max_iter=5)
    assert len(info.value.trace) > 0


# -------------------------------------------- argument-principle equivalence


@pytest.mark.parametrize(
    "n_d,g,e_d",
    [(4, 0.2, -0.5), (3, 0.12, -0.3), (5, 0.18, 0.25)],
)
def test_roots_match_argument_principle(n_d, g, e_d):
    """Polynomial-path roots = contour-counted roots of eta on sheet II."""
    m = ChainModel.semi_infinite(n_d, e_d, g)
    states = discrete_states(m)
    res = [s.z for s in states if s.state_class is StateClass.RESONANCE]

    rect = (-2.0, 2.0, -1.5, -1e-4)  # lower half of sheet II, off the axis

    def f(z):
        return eta(m, SheetedEnergy(z, II))

    inside = [z for z in res if -2 < z.real < 2 and -1.5 < z.imag < -1e-4]
    count = winding_number(f, rect)
    assert count == len(inside)

    # dense-grid Newton sweep finds the same set, no extras
    found = []
    for re0 in np.linspace(-1.8, 1.8, 25):
        for im0 in np.linspace(-1.2, -0.02, 13):
            try:
                z, _ = newton_polish(m, complex(re0, im0), II, tol=1e-12)
            except Exception:
                continue
            if not (-2 < z.real < 2 and -1.5 < z.imag < -1e-4):
                continue
            if any(abs(z - w) < 1e-8 for w in found):
                continue
            found.append(z)
    assert len(found) == len(inside)
    for z in found:
        assert min(abs(z - w) for w in inside) < 1e-9
