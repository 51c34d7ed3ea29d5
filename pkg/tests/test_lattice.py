import numpy as np
import pytest

from qwplates.lattice import (ProbabilityDistribution, SiteRangeError, WalkerState,
                              bloch_evolve, distribution, evolve,
                              linear_polarization_input, localized_input)
from qwplates.protocols import BlochGrid, ProtocolSpec


def reference_evolution(spec):
    """Independent dictionary-based walk evolution of |0, L>."""
    from qwplates.protocols import coin_W, rotation_R

    state = {(0, 0): 1.0 + 0j}  # (site, coin) -> amplitude

    def apply_coin(state, u):
        out = {}
        for (m, c), amp in state.items():
            for c2 in (0, 1):
                key = (m, c2)
                out[key] = out.get(key, 0j) + u[c2, c] * amp
        return out

    def apply_shift(state, half_angle):
        cc, ss = np.cos(half_angle), np.sin(half_angle)
        out = {}
        for (m, c), amp in state.items():
            out[(m, c)] = out.get((m, c), 0j) + cc * amp
            if c == 0:
                key = (m - 1, 1)
            else:
                key = (m + 1, 0)
            out[key] = out.get(key, 0j) + 1j * ss * amp
        return out

    coins = {"W": coin_W(), "R": rotation_R(), "Rdag": rotation_R().conj().T}
    for delta in spec.delta_schedule:
        for f in spec.factors:
            if f in coins:
                state = apply_coin(state, coins[f])
            elif f == "T":
                state = apply_shift(state, delta / 2)
            else:
                state = apply_shift(state, delta / 4)
    return state


@pytest.mark.parametrize("family,delta,tau", [
    ("U1", np.pi, 5), ("U2", 7 * np.pi / 4, 4), ("U3", np.pi, 5),
])
def test_matches_independent_reference(family, delta, tau):
    spec = ProtocolSpec.constant(family, delta, tau)
    ref = reference_evolution(spec)
    out = evolve(localized_input([1, 0]), spec)
    for (m, c), amp in ref.items():
        assert out.amplitude(m, c) == pytest.approx(amp, abs=1e-12)
    total = sum(abs(a) ** 2 for a in ref.values())
    assert total == pytest.approx(1.0, abs=1e-12)


def test_norm_conserved_over_320_steps():
    spec = ProtocolSpec.constant("U2", 7 * np.pi / 4, 320)
    out = evolve(linear_polarization_input(0.3), spec)
    assert abs(out.norm() - 1.0) < 1e-10


def test_light_cone_bound():
    for family, r in (("U1", 1), ("U2", 2), ("U3", 1)):
        spec = ProtocolSpec.constant(family, 2.0, 12)
        out = evolve(localized_input([1, 0]), spec)
        assert out.support_radius() <= r * 12


def test_too_small_window_rejected():
    spec = ProtocolSpec.constant("U1", np.pi, 10)
    with pytest.raises(SiteRangeError):
        evolve(localized_input([1, 0]), spec, half_range=5)


def test_zero_steps_is_identity():
    spec = ProtocolSpec.constant("U1", np.pi, 0)
    state0 = linear_polarization_input(1.1)
    out = evolve(state0, spec)
    assert out.amplitude(0, 0) == pytest.approx(state0.amplitude(0, 0))
    assert out.amplitude(0, 1) == pytest.approx(state0.amplitude(0, 1))


def test_unnormalized_coin_rejected():
    with pytest.raises(ValueError):
        localized_input([1, 1])


def test_distribution_sums_to_one():
    spec = ProtocolSpec.constant("U3", np.pi, 30)
    d = distribution(evolve(linear_polarization_input(0.0), spec))
    assert d.p.sum() == pytest.approx(1.0)
    assert d.prob(10 ** 6) == 0.0


def test_u1_symmetric_input_symmetric_distribution():
    # (|L> + |R>)/sqrt(2) evolves symmetrically under U1
    spec = ProtocolSpec.constant("U1", np.pi, 14)
    d = distribution(evolve(linear_polarization_input(0.0), spec))
    assert np.allclose(d.p, d.p[::-1], atol=1e-12)


@pytest.mark.parametrize("family,delta,tau", [
    ("U1", np.pi, 20), ("U2", 7 * np.pi / 4, 40), ("U3", np.pi, 33),
])
def test_bloch_vs_position_evolution(family, delta, tau):
    spec = ProtocolSpec.constant(family, delta, tau)
    grid = BlochGrid.from_pitch()
    state0 = linear_polarization_input(0.4)
    direct = evolve(state0, spec)
    via_bloch = bloch_evolve(state0, spec, grid)
    assert direct.half_range == via_bloch.half_range
    assert np.max(np.abs(direct.amplitudes - via_bloch.amplitudes)) < 1e-9


def test_bloch_grid_too_coarse_rejected():
    spec = ProtocolSpec.constant("U2", np.pi, 400)  # needs > 1250 samples
    with pytest.raises(SiteRangeError):
        bloch_evolve(linear_polarization_input(0.0), spec, BlochGrid.from_pitch())


def test_disordered_norm_conserved():
    spec = ProtocolSpec.disordered("U3", 80, 5, np.pi, np.pi / 5)
    out = evolve(linear_polarization_input(0.0), spec)
    assert abs(out.norm() - 1.0) < 1e-10


def test_walker_state_shape_validation():
    with pytest.raises(ValueError):
        WalkerState(np.zeros((2, 4), dtype=complex), 2)


def test_u3_spreads_over_400_sites_per_polarization():
    """The 320-step U3(pi) walk spreads each polarization over > 400 sites."""
    spec = ProtocolSpec.constant("U3", np.pi, 320)
    st = evolve(linear_polarization_input(0.0), spec)
    for c in (0, 1):
        p = np.abs(st.amplitudes[c]) ** 2
        occ = np.nonzero(p > 1e-12)[0]
        assert occ.max() - occ.min() + 1 > 400
