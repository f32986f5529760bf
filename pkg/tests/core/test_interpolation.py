import numpy as np
import pytest

from hcsp.ansatz import ContinuityOrder, dirichlet_mask, interp
from hcsp.diffengine import jet_lift
from hcsp.errors import ConfigurationError, ContractViolation


class InterpolationSuite:
    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_endpoint_values(self, m):
        h_prev, h_next = interp(m, np.array([0.0, 1.0]))
        np.testing.assert_array_equal(h_next, [0.0, 1.0])
        np.testing.assert_array_equal(h_prev, [1.0, 0.0])

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_derivatives_vanish_at_both_ends(self, m):
        tau = jet_lift(np.array([0.0, 1.0]), 1.0, 3)
        _, h_next = interp(ContinuityOrder(m=m), tau)
        derivatives = h_next.derivatives()
        np.testing.assert_allclose(derivatives[1:m + 1], 0.0, atol=1e-14)
        # El orden m+1 ya no se anula: la mezcla no es más suave de lo necesario
        assert np.all(np.abs(derivatives[m + 1]) > 1e-3)

    def test_partition_of_unity(self, rng):
        tau = rng.uniform(size=50)
        for m in range(3):
            h_prev, h_next = interp(m, tau)
            np.testing.assert_allclose(h_prev + h_next, 1.0)

    def test_monotone_blend(self):
        tau = np.linspace(0.0, 1.0, 101)
        for m in range(3):
            assert np.all(np.diff(interp(m, tau)[1]) >= 0.0)

    def test_tau_outside_unit_interval(self):
        with pytest.raises(ContractViolation):
            interp(1, np.array([0.5, 1.01]))
        with pytest.raises(ContractViolation):
            interp(0, -1e-6)
        interp(2, 1.0 + 1e-13)

    def test_unsupported_order(self):
        with pytest.raises(ConfigurationError):
            interp(3, 0.5)


class DirichletMaskSuite:
    def test_vanishes_on_boundary(self):
        np.testing.assert_array_equal(dirichlet_mask(np.array([0.0, np.pi]), (0.0, np.pi)), [0.0, 0.0])
        assert dirichlet_mask(1.0, (0.0, 2.0)) == pytest.approx(1.0)
