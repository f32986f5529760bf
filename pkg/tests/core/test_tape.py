import numpy as np
import pytest

from hcsp.diffengine import GradientTape, LayerShape, ParameterVector, jet_constant, jet_lift, value_and_gradient
from hcsp.errors import ContractViolation
from hcsp.network import NetworkConfig, forward, glorot_init, network_features


def _derivative_loss(config: NetworkConfig, x: np.ndarray, t: np.ndarray):
    """Pérdida con derivadas temporales hasta orden 3 y espaciales hasta orden 2."""

    def loss(params):
        t_pass = forward(params, network_features(config, jet_constant(x, 3), jet_lift(t, 1.0, 3)))
        x_pass = forward(params, network_features(config, jet_lift(x, 1.0, 2), jet_constant(t, 2)))
        residual = t_pass.derivative(3) + t_pass.derivative(1) * t_pass.derivative(0) - x_pass.derivative(2) * 0.5
        return (residual * residual).mean()

    return loss


class GradientTapeSuite:
    @pytest.mark.parametrize("depth,width", [(1, 4), (2, 8), (4, 32)])
    def test_gradient_matches_central_differences(self, depth, width, rng):
        config = NetworkConfig.for_inputs(depth=depth, width=width, spatial=True)
        params = glorot_init(config, rng_seed=depth * 100 + width)
        x = rng.uniform(-1.0, 1.0, size=6)
        t = rng.uniform(0.0, 1.0, size=6)
        loss = _derivative_loss(config, x, t)

        value, gradient = value_and_gradient(loss, params)
        assert value == pytest.approx(float(loss(params).value))

        h = 1e-6
        for i in rng.choice(params.size, size=min(15, params.size), replace=False):
            bump = np.zeros(params.size)
            bump[i] = h
            plus = float(loss(params.with_values(params.values + bump)).value)
            minus = float(loss(params.with_values(params.values - bump)).value)
            numeric = (plus - minus) / (2 * h)
            assert gradient.values[i] == pytest.approx(numeric, rel=1e-5, abs=1e-7)

    def test_untraced_loss_has_zero_gradient(self):
        params = ParameterVector(values=np.arange(6.0), layout=(LayerShape(fan_in=2, fan_out=2),))
        value, gradient = value_and_gradient(lambda watched: jet_constant(np.array(3.0), 0), params)
        assert value == 3.0
        assert not np.any(gradient.values)

    def test_non_scalar_output_is_rejected(self):
        params = ParameterVector(values=np.ones(3), layout=(LayerShape(fan_in=2, fan_out=1),))
        tape = GradientTape()
        watched = tape.watch(params)
        tape.set_output(watched.flat)
        with pytest.raises(ContractViolation):
            tape.backward()

    def test_output_from_another_tape_is_rejected(self):
        params = ParameterVector(values=np.ones(3), layout=(LayerShape(fan_in=2, fan_out=1),))
        other = GradientTape().watch(params).flat.sum()
        with pytest.raises(ContractViolation):
            GradientTape().set_output(other)

    def test_tape_watches_a_single_vector(self):
        params = ParameterVector(values=np.ones(3), layout=(LayerShape(fan_in=2, fan_out=1),))
        tape = GradientTape()
        tape.watch(params)
        with pytest.raises(ContractViolation):
            tape.watch(params)

    def test_linear_layer_gradient_is_exact(self):
        # u = x W + b con x = (1, 2): dL/dW = x, dL/db = 1 para L = u
        params = ParameterVector(values=np.array([0.5, -1.0, 0.25]), layout=(LayerShape(fan_in=2, fan_out=1),))
        features = jet_constant(np.array([[1.0, 2.0]]), 0)
        value, gradient = value_and_gradient(lambda watched: forward(watched, features).sum(), params)
        assert value == pytest.approx(0.5 - 2.0 + 0.25)
        np.testing.assert_allclose(gradient.values, [1.0, 2.0, 1.0])


class ParameterVectorSuite:
    def test_layout_length_is_validated(self):
        with pytest.raises(ValueError):
            ParameterVector(values=np.ones(4), layout=(LayerShape(fan_in=2, fan_out=1),))

    def test_from_layers_and_unflatten_agree(self, rng):
        layers = [(rng.normal(size=(3, 4)), rng.normal(size=4)), (rng.normal(size=(4, 1)), rng.normal(size=1))]
        params = ParameterVector.from_layers(layers)
        assert params.size == 3 * 4 + 4 + 4 + 1
        for (w, b), (w2, b2) in zip(layers, params.unflatten()):
            np.testing.assert_array_equal(w, w2)
            np.testing.assert_array_equal(b, b2)

    def test_frozen_copy_is_read_only(self):
        params = ParameterVector(values=np.ones(3), layout=(LayerShape(fan_in=2, fan_out=1),)).frozen_copy()
        with pytest.raises(ValueError):
            params.values[0] = 2.0

    def test_save_and_load_keep_seed_and_layout(self, tmp_path, rng):
        config = NetworkConfig.for_inputs(depth=2, width=5, spatial=False)
        params = glorot_init(config, rng_seed=7)
        path = params.save(tmp_path / "window_1.npz", seed=42)
        loaded, seed = ParameterVector.load(path)
        assert seed == 42
        assert loaded.layout == params.layout
        np.testing.assert_array_equal(loaded.values, params.values)
