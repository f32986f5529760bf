import numpy as np
import pytest

from hcsp.diffengine import LayerShape, ParameterVector
from hcsp.errors import TrainingAbort
from src.services.convergence_service import convergence_check
from src.services.implementations.adam_optimizer_service import AdamOptimizerService, adam_step
from src.services.implementations.lbfgs_optimizer_service import LBFGSOptimizerService, two_loop_direction
from src.services.schemas import OptimizerSchedule, WindowTrainState

CURVATURE = np.linspace(1.0, 2.0, 8)
LAYOUT = (LayerShape(fan_in=1, fan_out=4),)


def quadratic(params):
    theta = params.values
    return 0.5 * float(np.sum(CURVATURE * theta * theta)), params.with_values(CURVATURE * theta)


def schedule(**overrides):
    values = dict(adam_step=1e-2, adam_iters=10, lbfgs_max_iters=20, loss_tolerance=1e-9)
    values.update(overrides)
    return OptimizerSchedule(**values)


def start(values=None):
    return WindowTrainState.initial(ParameterVector(values=np.ones(8) if values is None else values, layout=LAYOUT))


class AdamSuite:
    def test_first_step_moves_by_the_step_size(self):
        state = AdamOptimizerService(schedule()).step(start(), quadratic)
        np.testing.assert_allclose(state.params.values, 1.0 - 1e-2, rtol=1e-6)
        assert state.adam_t == 1
        assert state.loss_history == (0.5 * CURVATURE.sum(),)

    def test_loss_decreases(self):
        service = AdamOptimizerService(schedule(adam_step=5e-2))
        state = start()
        for _ in range(50):
            state = service.step(state, quadratic)
        assert state.loss_history[-1] < state.loss_history[0]
        assert state.best_params is None

    def test_non_finite_gradient_aborts(self):
        state = start()
        with pytest.raises(TrainingAbort):
            adam_step(state, state.params.with_values(np.full(8, np.nan)), schedule())


class LBFGSSuite:
    def test_converges_on_a_quadratic(self):
        service = LBFGSOptimizerService(schedule())
        state = start()
        for _ in range(30):
            state = service.step(state, quadratic)
            if state.converged_reason is not None:
                break
        assert state.loss_history[-1] < 1e-12
        assert len(state.lbfgs_memory) <= 20

    def test_converges_with_a_single_curvature_pair(self):
        service = LBFGSOptimizerService(schedule(lbfgs_history=1))
        state = start()
        for _ in range(20):
            state = service.step(state, quadratic)
            assert len(state.lbfgs_memory) <= 1
            if state.converged_reason is not None:
                break
        assert state.converged_reason != "line_search_failure"
        assert state.loss_history[-1] < 1e-12

    def test_zero_gradient_is_converged(self):
        state = LBFGSOptimizerService(schedule()).step(start(np.zeros(8)), quadratic)
        assert state.converged_reason == "tolerance"
        assert state.loss_history == (0.0,)

    def test_line_search_failure_stops_at_the_current_iterate(self, caplog):
        def misleading(params):
            loss, gradient = quadratic(params)
            return loss, gradient.with_values(-gradient.values)

        with caplog.at_level("WARNING", logger="hcsp"):
            state = LBFGSOptimizerService(schedule()).step(start(), misleading)
        assert state.converged_reason == "line_search_failure"
        np.testing.assert_array_equal(state.params.values, np.ones(8))
        assert "búsqueda lineal fallida" in caplog.text

    def test_non_finite_loss_aborts(self):
        def broken(params):
            return float("nan"), params

        with pytest.raises(TrainingAbort):
            LBFGSOptimizerService(schedule()).step(start(), broken)

    def test_empty_memory_is_steepest_descent(self):
        gradient = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(two_loop_direction(gradient, ()), gradient)

    def test_two_loop_inverts_a_diagonal_hessian(self):
        # Con pares (s, y) a lo largo de cada eje la recursión reproduce H^{-1}
        hessian = np.array([1.0, 4.0])
        memory = tuple((s, hessian * s) for s in (np.array([1.0, 0.0]), np.array([0.0, 1.0])))
        g = np.array([2.0, 8.0])
        np.testing.assert_allclose(two_loop_direction(g, memory), g / hessian)


class ConvergenceSuite:
    def test_needs_a_full_window_of_differences(self):
        history = [1.0] * 5
        assert not convergence_check(history, schedule())
        history.append(1.0)
        assert convergence_check(history, schedule())

    def test_moving_average_against_tolerance(self):
        steady = [1.0, 1.0 + 1e-10, 1.0, 1.0 + 1e-10, 1.0, 1.0]
        noisy = [1.0, 1.1, 1.0, 1.1, 1.0, 1.1]
        assert convergence_check(steady, schedule())
        assert not convergence_check(noisy, schedule())

    def test_one_late_jump_outweighs_small_steps(self):
        # media de |Δ| = (4e-7 + 1e-5) / 5 = 2.08e-6 > 1e-6
        history = list(1.0 + np.cumsum([0.0, 1e-7, 1e-7, 1e-7, 1e-7, 1e-5]))
        assert not convergence_check(history, schedule(loss_tolerance=1e-6))
        assert convergence_check(history[:-1] + [history[-2] + 1e-7], schedule(loss_tolerance=1e-6))

    def test_only_the_last_differences_count(self):
        history = [100.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
        assert convergence_check(history, schedule())

    def test_evaluation_is_appended(self):
        history = [2.0] * 5
        assert convergence_check(history, schedule(), lambda: 2.0)
        assert history == [2.0] * 6


class WindowTrainStateSuite:
    def test_training_losses_do_not_pick_the_best_iterate(self):
        state = start().with_loss(1e-4).with_loss(5e-4)
        assert state.loss_history == (1e-4, 5e-4)
        assert state.best_params is None
        assert state.restore_best() is state

    def test_best_iterate_follows_the_evaluation_loss(self):
        early = start().with_loss(1e-4).with_eval(2e-3)
        later_values = np.full(8, 0.5)
        later = early.with_loss(5e-4, params=early.params.with_values(later_values)).with_eval(1e-3)
        assert later.best_loss == 1e-3
        np.testing.assert_array_equal(later.best_params.values, later_values)

        worse = later.with_loss(1e-5, params=later.params.with_values(np.zeros(8))).with_eval(5e-3)
        np.testing.assert_array_equal(worse.restore_best().params.values, later_values)
        assert worse.best_loss == 1e-3
