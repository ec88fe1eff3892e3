import numpy as np
import pytest

from app.core import Trace, trace_from_array
from app.exceptions import InvalidInputError
from app.harness import PointMassEnv
from app.logic import TRUE, TargetRef, reach
from app.metrics import dist_l2
from app.planner import (
    choose_candidate,
    cost,
    evaluate_candidates,
    plan_step,
    run_receding_horizon,
    sample_sequences,
    to_csv,
)
from app.schemas import PlanConfig


def line_trace(*xs):
    return trace_from_array("vector", [[x, 0.0] for x in xs])


@pytest.fixture
def goal(model):
    return TargetRef("goal", model.encode((1.0, 0.0)), "l2", "goal")


class TestCost:
    """Test the violation cost"""

    def test_satisfied_is_free(self, origin):
        """Test a satisfied trace costs nothing"""
        assert cost(reach(origin, 0.5), line_trace(2.0, 0.3)) == 0.0

    def test_violation(self, origin):
        """Test an unsatisfied trace costs minus its score"""
        assert cost(reach(origin, 0.5), line_trace(2.0, 0.8)) == pytest.approx(0.3, abs=1e-12)

    def test_empty(self, origin):
        """Test the empty trace is rejected"""
        with pytest.raises(InvalidInputError):
            cost(reach(origin, 0.5), Trace())


class TestChooseCandidate:
    """Test one planning step"""

    def test_true_picks_first(self, model, small_plan):
        """Test every candidate ties on true, so index 0 wins"""
        observed = Trace((model.encode((0.0, 0.0)),))
        decision = choose_candidate(model, observed, [], TRUE, small_plan)
        assert decision.index == 0
        assert decision.cost == 0.0
        np.testing.assert_array_equal(decision.action, sample_sequences(model, small_plan, 0)[0, 0])

    def test_single_sample(self, model, goal):
        """Test N = 1 returns that sample's first action"""
        cfg = PlanConfig(horizon=3, samples=1, seed=1)
        observed = Trace((model.encode((0.0, 0.0)),))
        decision = choose_candidate(model, observed, [], reach(goal, 0.2), cfg)
        assert decision.index == 0
        np.testing.assert_array_equal(decision.action, sample_sequences(model, cfg, 0)[0, 0])

    def test_actions_in_box(self, model, small_plan):
        """Test sampled actions respect the action bound"""
        sequences = sample_sequences(model, small_plan, 3)
        assert sequences.shape == (64, 4, 2)
        assert np.all(np.abs(sequences) <= model.a_max)

    def test_picks_lowest_cost(self, model, goal, small_plan):
        """Test the chosen candidate has the best predictive score"""
        observed = Trace((model.encode((0.0, 0.0)),))
        f = reach(goal, 0.2)
        scores = evaluate_candidates(model, observed, [], f, sample_sequences(model, small_plan, 0))
        decision = choose_candidate(model, observed, [], f, small_plan)
        assert decision.score == scores.max()
        assert decision.cost == max(0.0, -scores.max())

    def test_workers_do_not_change_choice(self, model, goal, small_plan):
        """Test chunked evaluation picks the same candidate"""
        observed = Trace((model.encode((0.0, 0.0)),))
        f = reach(goal, 0.2)
        serial = choose_candidate(model, observed, [], f, small_plan)
        parallel = choose_candidate(model, observed, [], f, small_plan.copy(update={"workers": 4}))
        assert serial.index == parallel.index
        np.testing.assert_array_equal(serial.action, parallel.action)

    @pytest.mark.parametrize("seed", [7, 11, 23])
    def test_one_step_goal(self, model, seed):
        """Test K = 1 with many samples moves as close as an exhaustive 0.01 grid of the action box allows"""
        start, target = np.array([0.0, 0.0]), np.array([0.2, -0.1])
        goal = TargetRef("goal", model.encode(target), "l2", "goal")
        observed = Trace((model.encode(start),))
        action = plan_step(model, observed, [], reach(goal, 0.05), PlanConfig(horizon=1, samples=4096, seed=seed))
        assert np.all(np.abs(action) <= model.a_max)

        axis = np.arange(-model.a_max, model.a_max + 1e-9, 0.01)
        box = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
        grid_best = np.linalg.norm(start + box - target, axis=1).min()
        assert grid_best <= 0.05

        initial = dist_l2(observed[0], goal.embedding)
        reached = dist_l2(model.step(list(observed), [], action), goal.embedding)
        assert reached < initial
        assert reached <= 0.05
        assert reached == pytest.approx(np.linalg.norm(start + action - target), abs=1e-9)

    def test_needs_observation(self, model, goal, small_plan):
        """Test an empty observed trace is rejected"""
        with pytest.raises(InvalidInputError):
            choose_candidate(model, Trace(), [], reach(goal, 0.2), small_plan)


class TestRecedingHorizon:
    """Test the closed loop"""

    def test_reach_makes_progress(self, model, goal):
        """Test the point moves toward the goal"""
        env = PointMassEnv(model, (0.0, 0.0))
        cfg = PlanConfig(horizon=4, samples=256, seed=7, max_steps=8)
        result = run_receding_horizon(env, model, reach(goal, 0.2), cfg)
        assert np.linalg.norm(env.state - np.array([1.0, 0.0])) < 1.0
        assert result.final_score > result.scores[0]
        assert len(result.scores) == result.steps + 1
        assert len(result.states) == result.steps + 1

    def test_early_stop(self, model, small_plan):
        """Test a satisfied monotone formula stops before acting"""
        env = PointMassEnv(model, (0.0, 0.0))
        result = run_receding_horizon(env, model, TRUE, small_plan)
        assert result.steps == 0
        assert result.satisfied

    def test_no_early_stop(self, model, small_plan):
        """Test the loop runs to max_steps when told to"""
        env = PointMassEnv(model, (0.0, 0.0))
        result = run_receding_horizon(env, model, TRUE, small_plan.copy(update={"early_stop": False}))
        assert result.steps == small_plan.max_steps
        assert len(result.trace) == small_plan.max_steps + 1

    def test_deterministic(self, model, goal, small_plan):
        """Test identical configs give identical episodes"""
        results = [
            run_receding_horizon(PointMassEnv(model, (0.0, 0.0)), model, reach(goal, 0.2), small_plan)
            for _ in range(2)
        ]
        assert results[0].actions == results[1].actions
        assert results[0].scores == results[1].scores

    def test_timings(self, model, goal, small_plan):
        """Test one timing per step"""
        timings = []
        result = run_receding_horizon(PointMassEnv(model, (0.0, 0.0)), model, reach(goal, 0.2), small_plan, timings)
        assert len(timings) == result.steps


class TestCsv:
    """Test the per-step CSV"""

    def test_write(self, model, goal, small_plan, tmp_path):
        """Test header and rows"""
        cfg = small_plan.copy(update={"early_stop": False})
        result = run_receding_horizon(PointMassEnv(model, (0.0, 0.0)), model, reach(goal, 0.2), cfg)
        path = to_csv(result, tmp_path / "out" / "episode.csv")
        assert path.read_text().splitlines()[0] == "step,score,cost,a0,a1"
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        assert rows.shape == (cfg.max_steps, 5)
        np.testing.assert_array_equal(rows[:, 0], np.arange(cfg.max_steps))
        np.testing.assert_array_equal(rows[:, 3:], np.array(result.actions))
        np.testing.assert_array_equal(rows[:, 1], result.scores[1:])
