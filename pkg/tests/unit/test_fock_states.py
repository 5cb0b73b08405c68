"""
Unit tests for truncated Fock-basis states and state-level operations.
"""

import math

import numpy as np
import pytest
from scipy.stats import poisson

from cvqd.constants import Mode, Parity
from cvqd.exceptions import DegenerateState, InvalidState, NotPSD, OutOfCutoff
from cvqd.models.states import DensityMatrix, Ket, PhasePoint
from cvqd.physics.fock import (
    factor_fidelity,
    factor_fidelity_gradient,
    fidelity,
    fidelity_gradient,
    hermitian_sqrt,
    ladder_ops,
    make_cat,
    make_coherent,
    make_fock,
    make_squeezed_vacuum,
    make_thermal,
    make_vacuum,
    mean_photon,
    partial_trace,
    purity,
    quadrature_mean,
    quadrature_variance,
    reference_fidelity,
    renormalize,
    tail_mass,
    tensor_product,
    trace_distance,
)
from tests.helpers.assertions import assert_density_valid
from tests.helpers.states import random_state


@pytest.mark.unit
class TestDensityMatrix:
    """Tests for the DensityMatrix and Ket value types."""

    def test_data_is_read_only(self):
        """Stored arrays cannot be modified in place."""
        rho = make_vacuum(4)
        assert not rho.data.flags.writeable
        with pytest.raises(ValueError):
            rho.data[0, 0] = 0.5

    def test_wrong_shape_rejected(self):
        """A matrix that does not match cutoff**modes raises InvalidState."""
        with pytest.raises(InvalidState):
            DensityMatrix(np.eye(3), cutoff=4)
        with pytest.raises(InvalidState):
            DensityMatrix(np.eye(4), cutoff=4, modes=2)

    def test_cutoff_below_two_rejected(self):
        """Cutoff 1 is not a usable Fock space."""
        with pytest.raises(InvalidState):
            DensityMatrix(np.eye(1), cutoff=1)

    def test_non_finite_rejected(self):
        """NaN entries raise InvalidState."""
        data = np.eye(2) * 0.5
        data[0, 1] = np.nan
        with pytest.raises(InvalidState):
            DensityMatrix(data, cutoff=2)

    def test_check_rejects_non_hermitian(self):
        """check() catches an asymmetric off-diagonal."""
        rho = DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]), cutoff=2)
        with pytest.raises(InvalidState, match="not Hermitian"):
            rho.check()

    def test_check_rejects_negative_eigenvalue(self):
        """check() catches a negative population."""
        rho = DensityMatrix(np.diag([1.2, -0.2]), cutoff=2)
        with pytest.raises(InvalidState, match="negative eigenvalue"):
            rho.check()

    def test_check_rejects_trace_above_one(self):
        """check() catches trace 2."""
        with pytest.raises(InvalidState, match="trace"):
            DensityMatrix(np.eye(2), cutoff=2).check()

    def test_ket_shape_checked(self):
        """Ket amplitudes must have length cutoff."""
        with pytest.raises(InvalidState):
            Ket(np.ones(3), cutoff=4)

    def test_ket_to_density_is_outer_product(self):
        """Ket.to_density returns |psi><psi| at the ket's cutoff."""
        ket = make_coherent(0.3 + 0.2j, 6)
        rho = ket.to_density()
        assert rho.cutoff == 6
        assert rho.modes == 1
        np.testing.assert_array_equal(rho.data, np.outer(ket.amplitudes, ket.amplitudes.conj()))

    def test_phase_point_beta(self):
        """beta = (x + ip)/sqrt(2)."""
        point = PhasePoint(1.0, -2.0)
        assert point.beta == pytest.approx(complex(1.0, -2.0) / math.sqrt(2.0))


@pytest.mark.unit
class TestLadderOperators:
    """Tests for the truncated ladder operators."""

    def test_commutator_exact_below_top_level(self):
        """[a, a†] is the identity except for the top diagonal entry 1 - c."""
        c = 7
        ops = ladder_ops(c)
        commutator = ops.a @ ops.adag - ops.adag @ ops.a
        expected = np.eye(c)
        expected[-1, -1] = 1 - c
        np.testing.assert_allclose(commutator, expected, atol=1e-12)

    def test_number_operator_is_diagonal(self):
        """a†a equals diag(0..c-1) exactly."""
        ops = ladder_ops(5)
        np.testing.assert_allclose(ops.adag @ ops.a, ops.number, atol=1e-14)


@pytest.mark.unit
class TestStateConstructors:
    """Tests for vacuum, Fock, coherent, thermal, squeezed and cat states."""

    def test_vacuum(self):
        """Vacuum has unit trace and zero photons."""
        rho = make_vacuum(6)
        assert rho.trace == 1.0
        assert mean_photon(rho) == 0.0

    def test_fock_out_of_cutoff(self):
        """Levels at or above the cutoff raise OutOfCutoff."""
        with pytest.raises(OutOfCutoff):
            make_fock(6, 6)
        with pytest.raises(OutOfCutoff):
            make_fock(-1, 6)

    def test_fock_level(self):
        """|3><3| has mean photon number 3."""
        assert mean_photon(make_fock(3, 6)) == pytest.approx(3.0)

    @pytest.mark.parametrize("alpha, cutoff", [(1.0, 15), (2.0, 10), (0.5j, 6)])
    def test_coherent_norm_deficit_is_poisson_tail(self, alpha, cutoff):
        """1 - ||alpha>|^2 equals the Poisson(|alpha|^2) mass beyond cutoff-1."""
        ket = make_coherent(alpha, cutoff)
        deficit = 1.0 - ket.norm_squared
        expected = poisson.sf(cutoff - 1, abs(alpha) ** 2)
        assert deficit == pytest.approx(expected, rel=1e-6, abs=1e-15)

    def test_coherent_quadrature_means(self):
        """<x> = sqrt(2) Re(alpha), <p> = sqrt(2) Im(alpha)."""
        alpha = 0.7 * np.exp(0.4j)
        rho = make_coherent(alpha, 30).to_density()
        assert quadrature_mean(rho, "x") == pytest.approx(math.sqrt(2) * alpha.real, abs=1e-10)
        assert quadrature_mean(rho, "p") == pytest.approx(math.sqrt(2) * alpha.imag, abs=1e-10)

    def test_thermal_trace_is_not_renormalized(self):
        """The discarded tail leaves trace 1 - q^c."""
        nbar, c = 0.8, 6
        q = nbar / (1 + nbar)
        assert make_thermal(nbar, c).trace == pytest.approx(1 - q**c, abs=1e-14)

    def test_thermal_mean_photon_and_purity(self):
        """Renormalized thermal state at a wide cutoff has <n> = nbar and purity 1/(2nbar+1)."""
        rho = renormalize(make_thermal(0.5, 40))
        assert mean_photon(rho) == pytest.approx(0.5, abs=1e-12)
        assert purity(rho) == pytest.approx(0.5, abs=1e-12)

    def test_thermal_negative_nbar(self):
        """Negative occupation raises InvalidState."""
        with pytest.raises(InvalidState):
            make_thermal(-0.1, 4)

    def test_squeezed_variances(self):
        """S(r)|0> has x-variance exp(-2r)/2 and p-variance exp(2r)/2."""
        r = 0.5
        rho = make_squeezed_vacuum(r, 40).to_density()
        assert quadrature_variance(rho, "x") == pytest.approx(math.exp(-2 * r) / 2, abs=1e-8)
        assert quadrature_variance(rho, "p") == pytest.approx(math.exp(2 * r) / 2, abs=1e-8)

    def test_squeezed_has_only_even_levels(self):
        """Odd amplitudes of a squeezed vacuum vanish."""
        ket = make_squeezed_vacuum(0.3, 12)
        assert np.all(ket.amplitudes[1::2] == 0)

    def test_cat_parity(self):
        """Even cats live on even levels and odd cats on odd levels."""
        even = make_cat(1.0, Parity.EVEN, 20)
        odd = make_cat(1.0, "odd", 20)
        assert np.allclose(even.amplitudes[1::2], 0)
        assert np.allclose(odd.amplitudes[0::2], 0)
        assert even.norm_squared == pytest.approx(1.0, abs=1e-12)
        assert odd.norm_squared == pytest.approx(1.0, abs=1e-12)

    def test_odd_cat_at_zero_amplitude(self):
        """An odd cat with alpha = 0 has no normalization."""
        with pytest.raises(DegenerateState):
            make_cat(0.0, Parity.ODD, 8)

    def test_even_cat_at_zero_is_vacuum(self):
        """An even cat with alpha = 0 collapses to the vacuum."""
        rho = make_cat(0.0, Parity.EVEN, 8).to_density()
        assert fidelity(rho, make_vacuum(8)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.unit
class TestCompositionAndReduction:
    """Tests for tensor_product, partial_trace and renormalize."""

    def test_partial_trace_recovers_factors(self, rng):
        """Tracing either slot of a product returns the other factor."""
        a = random_state(rng, 4)
        b = random_state(rng, 4)
        joint = tensor_product(a, b)
        assert joint.modes == 2
        np.testing.assert_allclose(partial_trace(joint, Mode.B).data, a.data, atol=1e-12)
        np.testing.assert_allclose(partial_trace(joint, "A").data, b.data, atol=1e-12)

    def test_composite_index_ordering(self):
        """|1>_A|0>_B sits at composite index 1*c + 0."""
        c = 3
        joint = tensor_product(make_fock(1, c), make_vacuum(c))
        assert joint.data[c, c] == 1.0

    def test_tensor_cutoff_mismatch(self):
        """Factors at different cutoffs cannot be combined."""
        with pytest.raises(InvalidState):
            tensor_product(make_vacuum(3), make_vacuum(4))

    def test_partial_trace_needs_two_modes(self):
        """A single-mode state has nothing to trace out."""
        with pytest.raises(InvalidState):
            partial_trace(make_vacuum(3), Mode.A)

    def test_renormalize_zero_trace(self):
        """A zero matrix cannot be renormalized."""
        with pytest.raises(DegenerateState):
            renormalize(DensityMatrix(np.zeros((3, 3)), 3))

    def test_renormalize_scales_to_unit_trace(self):
        """renormalize divides by the trace."""
        rho = renormalize(make_thermal(1.0, 4))
        assert rho.trace == pytest.approx(1.0, abs=1e-14)


@pytest.mark.unit
class TestFidelity:
    """Tests for Uhlmann fidelity and its helpers."""

    def test_vacuum_against_coherent(self):
        """F(|0>, |alpha>) = exp(-|alpha|^2)."""
        value = fidelity(make_vacuum(15), make_coherent(1.0, 15).to_density())
        assert value == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_identical_states(self, rng):
        """F(rho, rho) = 1 for a normalized mixed state."""
        rho = random_state(rng, 5)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_thermal_state_against_itself(self):
        """Populations near 1e-10 still count: F(rho_th, rho_th) = 1 to 1e-12."""
        rho = renormalize(make_thermal(0.5, 20))
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
        assert reference_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)

    def test_factor_form_matches_density_form(self, rng):
        """factor_fidelity on A equals reference_fidelity on A A-dagger."""
        reference = random_state(rng, 5)
        factor = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
        factor /= np.linalg.norm(factor)
        sigma = DensityMatrix(factor @ factor.conj().T, 5)
        assert factor_fidelity(reference, factor) == pytest.approx(
            reference_fidelity(reference, sigma), abs=1e-12
        )

    def test_factor_gradient_matches_finite_difference(self, rng):
        """dF = Re tr(H dA) for a complex direction in the factor."""
        reference = random_state(rng, 4)
        factor = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) / 4.0
        direction = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        value, gradient = factor_fidelity_gradient(reference, factor)
        assert value == pytest.approx(factor_fidelity(reference, factor), abs=1e-12)
        step = 1e-6
        plus = factor_fidelity(reference, factor + step * direction)
        minus = factor_fidelity(reference, factor - step * direction)
        analytic = float(np.real(np.sum(gradient * direction.T)))
        assert analytic == pytest.approx((plus - minus) / (2 * step), abs=1e-7)

    def test_symmetric_and_bounded(self, rng):
        """F is symmetric and lies in [0, 1]."""
        for _ in range(5):
            rho = random_state(rng, 5)
            sigma = random_state(rng, 5, rank=2)
            forward = fidelity(rho, sigma)
            assert 0.0 <= forward <= 1.0 + 1e-12
            assert forward == pytest.approx(fidelity(sigma, rho), abs=1e-10)

    def test_pure_argument_reduces_to_overlap(self, rng):
        """F(|psi><psi|, sigma) = <psi|sigma|psi>."""
        psi = make_coherent(0.6 + 0.2j, 10)
        sigma = random_state(rng, 10)
        expected = float(np.real(psi.amplitudes.conj() @ sigma.data @ psi.amplitudes))
        assert fidelity(psi.to_density(), sigma) == pytest.approx(expected, abs=1e-12)

    def test_orthogonal_states(self):
        """Orthogonal Fock states have zero fidelity."""
        assert fidelity(make_fock(1, 4), make_fock(2, 4)) == pytest.approx(0.0, abs=1e-14)

    def test_shape_mismatch(self):
        """States at different cutoffs raise InvalidState."""
        with pytest.raises(InvalidState):
            fidelity(make_vacuum(3), make_vacuum(4))

    def test_gradient_matches_finite_difference(self, rng):
        """dF = Re tr(G dsigma) for a Hermitian direction."""
        reference = random_state(rng, 4)
        sigma = random_state(rng, 4)
        value, gradient = fidelity_gradient(reference, sigma)
        assert value == pytest.approx(reference_fidelity(reference, sigma), abs=1e-12)

        direction = random_state(rng, 4).data - random_state(rng, 4).data
        step = 1e-6
        plus = reference_fidelity(reference, sigma.with_data(sigma.data + step * direction))
        minus = reference_fidelity(reference, sigma.with_data(sigma.data - step * direction))
        numeric = (plus - minus) / (2 * step)
        analytic = float(np.real(np.sum(gradient * direction.T)))
        assert analytic == pytest.approx(numeric, abs=1e-7)


@pytest.mark.unit
class TestSpectralHelpers:
    """Tests for hermitian_sqrt, trace_distance, purity and tail_mass."""

    def test_sqrt_squares_back(self, rng):
        """hermitian_sqrt(M)^2 = M for a PSD matrix."""
        rho = random_state(rng, 5)
        root = hermitian_sqrt(rho.data)
        np.testing.assert_allclose(root @ root, rho.data, atol=1e-12)

    def test_sqrt_rejects_non_hermitian(self):
        """A non-Hermitian input raises InvalidState."""
        with pytest.raises(InvalidState):
            hermitian_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_sqrt_rejects_negative_spectrum(self):
        """An eigenvalue of -0.1 raises NotPSD."""
        with pytest.raises(NotPSD):
            hermitian_sqrt(np.diag([1.0, -0.1]))

    def test_sqrt_clamps_rounding_noise(self):
        """Eigenvalues just below zero are treated as zero."""
        root = hermitian_sqrt(np.diag([1.0, -1e-12]))
        np.testing.assert_allclose(root, np.diag([1.0, 0.0]), atol=1e-15)

    def test_trace_distance(self):
        """Orthogonal pure states are at distance 1, identical ones at 0."""
        assert trace_distance(make_fock(0, 4), make_fock(3, 4)) == pytest.approx(1.0)
        assert trace_distance(make_fock(2, 4), make_fock(2, 4)) == 0.0

    def test_purity_of_pure_state(self):
        """Pure states have purity 1."""
        assert purity(make_coherent(0.3, 12).to_density()) == pytest.approx(1.0, abs=1e-12)

    def test_tail_mass(self):
        """Population at or above a level."""
        rho = make_fock(3, 6)
        assert tail_mass(rho, 3) == 1.0
        assert tail_mass(rho, 4) == 0.0

    def test_vacuum_variance(self):
        """Vacuum quadrature variance is 1/2."""
        assert quadrature_variance(make_vacuum(5), "x") == pytest.approx(0.5, abs=1e-15)
        assert quadrature_variance(make_vacuum(5), "p") == pytest.approx(0.5, abs=1e-15)

    def test_unknown_quadrature(self):
        """Only 'x' and 'p' are quadratures."""
        with pytest.raises(InvalidState):
            quadrature_mean(make_vacuum(3), "q")

    def test_random_state_is_valid(self, rng):
        """Random test states satisfy every density-matrix invariant."""
        assert_density_valid(random_state(rng, 6, rank=3))
