import numpy as np
import pytest

from cohsim import channels as ch
from cohsim import linalg as la
from cohsim import resources as rs
from cohsim.implement import SimulationQuery, implementation_error
from cohsim.measures import state_robustness_dual
from cohsim.sampling import haar_state


def flag(d, p):
    return rs.flagpole_state(rs.FlagpoleSpec(d, p))


# -- flagpole states -----------------------------------------------------------

def test_flagpole_uniform_limit_is_cosdit():
    for d in (2, 3, 5):
        assert np.abs(flag(d, 1 / d) - la.cosdit(d)).max() < 1e-12


def test_flagpole_anchor_two_thirds():
    v = flag(3, 2 / 3)
    assert np.abs(v - np.array([np.sqrt(2 / 3), np.sqrt(1 / 6), np.sqrt(1 / 6)])).max() < 1e-12
    assert abs(rs.flagpole_robustness(rs.FlagpoleSpec(3, 2 / 3)) - 5 / 3) < 1e-12
    assert abs(state_robustness_dual(la.projector(v)) - 5 / 3) < 1e-6


def test_flagpole_incoherent_limit():
    assert np.abs(flag(4, 1.0) - la.ket(0, 4)).max() < 1e-12


def test_flagpole_spec_validation():
    with pytest.raises(ValueError):
        rs.FlagpoleSpec(3, 0.2)  # below 1/d
    with pytest.raises(ValueError):
        rs.FlagpoleSpec(1, 1.0)


def test_flagpole_robustness_decreasing_in_p():
    for d in (3, 4):
        grid = np.linspace(1 / d, 1.0, 12)
        vals = [rs.flagpole_robustness(rs.FlagpoleSpec(d, p)) for p in grid]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


# -- conversion criteria ---------------------------------------------------------

def test_lemma1_footnote_pair():
    cosbit = la.cosdit(2)
    pole = flag(3, 2 / 3)
    # flagpole cannot reach the cosbit: lambda1 2/3 > 1/2
    v = rs.lemma1_check(pole, cosbit)
    assert v.possible == "no"
    assert v.criterion == "lambda1-monotone"
    # the reverse is not decided by this test
    assert rs.lemma1_check(cosbit, pole).possible == "undetermined"


def test_lemma1_cosdit_target_sufficiency():
    psi = np.sqrt(np.array([0.3, 0.3, 0.3, 0.1]))
    assert rs.lemma1_check(psi, la.cosdit(3)).possible == "yes"
    # and a state exceeding 1/d is firmly rejected
    worse = np.sqrt(np.array([0.4, 0.3, 0.3]))
    assert rs.lemma1_check(worse, la.cosdit(3)).possible == "no"


def test_majorization_examples():
    rng = np.random.default_rng(0)
    # cosdit converts to anything of rank <= d
    for _ in range(5):
        target = haar_state(3, rng)
        assert rs.majorization_convertible(la.cosdit(3), target)
    # coherence cannot be created from |0>
    assert not rs.majorization_convertible(la.ket(0, 2), la.cosdit(2))
    # low-pole flagpoles convert to the smaller cosdit
    assert rs.majorization_convertible(flag(3, 0.45), la.cosdit(2))
    assert not rs.majorization_convertible(flag(3, 0.55), la.cosdit(2))


def test_plane_criterion_examples():
    assert rs.plane_criterion(2, la.cosdit(2))
    assert not rs.plane_criterion(1, la.cosdit(2))
    assert not rs.plane_criterion(2, flag(3, 2 / 3))  # 1.633 > sqrt(2)


def test_plane_criterion_consistent_with_majorization():
    # IO convertibility implies MIO convertibility on cosdit dilutions
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        k = int(rng.integers(1, 5))
        target = haar_state(d, rng)
        if rs.majorization_convertible(la.cosdit(k), target):
            assert rs.plane_criterion(k, target)


def test_mio_convertible_incomparable_pair():
    cosbit = la.cosdit(2)
    pole = flag(3, 2 / 3)
    fwd = rs.mio_convertible(cosbit, pole)
    assert fwd.possible == "no"
    rev = rs.mio_convertible(pole, cosbit)
    assert rev.possible == "no"
    assert rev.criterion == "lambda1-monotone"


def test_mio_convertible_yes_via_majorization():
    v = rs.mio_convertible(la.cosdit(3), flag(3, 0.5))
    assert v.possible == "yes"
    assert v.criterion == "majorization"


# -- threshold and construction ----------------------------------------------------

def test_flagpole_threshold_values():
    assert abs(rs.flagpole_threshold(ch.dephasing_channel(2)) - 1.0) < 1e-9
    assert abs(rs.flagpole_threshold(ch.qubit_unitary(np.pi / 4)) - 0.5) < 1e-9
    expect = 1.0 / (1.0 + np.sin(np.pi / 4))
    assert abs(rs.flagpole_threshold(ch.qubit_unitary(np.pi / 8)) - expect) < 1e-9


def test_construct_boundary_and_infeasibility():
    n = ch.qubit_unitary(np.pi / 4)
    sim = rs.construct_flagpole_simulation(n, rs.FlagpoleSpec(3, 0.5))
    assert sim.feasible and sim.residual <= 1e-6
    bad = rs.construct_flagpole_simulation(n, rs.FlagpoleSpec(3, 0.6))
    assert not bad.feasible
    assert bad.violation >= 1e-4


def test_construct_mio_target_trivially_feasible():
    sim = rs.construct_flagpole_simulation(ch.dephasing_channel(2), rs.FlagpoleSpec(3, 1.0))
    assert sim.feasible and sim.residual <= 1e-6


def test_construct_produces_working_mio():
    theta = np.pi / 8
    n = ch.qubit_unitary(theta)
    spec = rs.FlagpoleSpec(3, 0.5)
    sim = rs.construct_flagpole_simulation(n, spec)
    assert sim.feasible
    assert ch.is_mio(sim.mio, tol=1e-6).ok
    pole_rho = la.projector(flag(3, 0.5))
    for i in range(2):
        rho = la.projector(la.ket(i, 2))
        out = ch.apply_channel(sim.mio, la.kron(pole_rho, rho))
        assert np.abs(out - ch.apply_channel(n, rho)).max() < 1e-6
    rho = la.projector(la.cosdit(2))
    out = ch.apply_channel(sim.mio, la.kron(pole_rho, rho))
    assert np.abs(out - ch.apply_channel(n, rho)).max() < 1e-6


def test_construct_requires_dimension_margin():
    with pytest.raises(la.DimensionError):
        rs.construct_flagpole_simulation(ch.qubit_unitary(0.3), rs.FlagpoleSpec(2, 0.5))


def test_feasibility_boundary_matches_threshold():
    for theta in (np.pi / 14, np.pi / 8, np.pi / 4):
        n = ch.qubit_unitary(theta)
        p_star = rs.flagpole_threshold(n)
        lo, hi = 1 / 3, 1.0
        # bisect the feasibility boundary of the construction to 1e-3
        while hi - lo > 1e-3:
            mid = (lo + hi) / 2
            if rs.construct_flagpole_simulation(n, rs.FlagpoleSpec(3, mid)).feasible:
                lo = mid
            else:
                hi = mid
        assert abs((lo + hi) / 2 - p_star) < 2e-3


def test_every_coherent_qutrit_is_useful():
    # any rank-3 pure state majorizes some coherent flagpole, which in turn
    # implements a coherent unitary exactly
    rng = np.random.default_rng(2)
    for _ in range(5):
        probs = np.sort(rng.dirichlet(np.ones(3) * 2.0))[::-1]
        psi = np.sqrt(probs).astype(complex)
        q, p3 = float(probs[0]), float(probs[2])
        p_min = max(q, 1.0 - 2.0 * p3)
        assert rs.majorization_convertible(psi, flag(3, p_min))
        if p_min >= 0.5:
            sin2t = min(1.0, (1.0 - p_min) / p_min)
        else:
            sin2t = 1.0  # flagpole converts to a cosbit, any qubit unitary works
        theta = 0.5 * np.arcsin(sin2t)
        sim = rs.construct_flagpole_simulation(ch.qubit_unitary(theta), rs.FlagpoleSpec(3, max(p_min, 1 / 3)))
        assert sim.feasible and sim.residual <= 1e-5
        # when the state itself majorizes the flagpole with p = lambda1 (spec's
        # canonical case), the implemented unitary has sin 2theta = (1-q)/q
        if q >= 0.5 and 1.0 - 2.0 * p3 <= q:
            assert abs(p_min - q) < 1e-12


def test_prop3_converse_non_cosbit_qubit_resources():
    # only the cosbit implements a coherent unitary exactly among qubit resources
    rng = np.random.default_rng(3)
    n = ch.qubit_unitary(np.pi / 9)
    for _ in range(4):
        q = rng.uniform(0.55, 0.95)
        w = np.array([np.sqrt(q), np.sqrt(1 - q)], dtype=complex)
        assert implementation_error(SimulationQuery(n, w)) > 1e-6


def test_parse_state_descriptors(tmp_path):
    assert np.abs(rs.parse_state("cosdit:d=3") - la.cosdit(3)).max() < 1e-12
    assert np.abs(rs.parse_state("basis:d=3,i=1") - la.ket(1, 3)).max() < 1e-12
    assert np.abs(rs.parse_state("flagpole:d=3,p=0.5") - flag(3, 0.5)).max() < 1e-12
    v = rs.parse_state("pure:amps=3;4")
    assert np.abs(v - np.array([0.6, 0.8])).max() < 1e-12
    la.dump_matrix(np.eye(2) / 2, tmp_path / "rho.json")
    rho = rs.parse_state(f"file={tmp_path / 'rho.json'}")
    assert rho.shape == (2, 2)
    with pytest.raises(ValueError, match="unknown state kind"):
        rs.parse_state("junk:d=2")
    with pytest.raises(ValueError, match="field 0"):
        rs.parse_state("cosdit:3")
