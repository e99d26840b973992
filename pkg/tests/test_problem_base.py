"""Tests for the problem object and the natural map."""

import numpy as np
import pytest

from iqvip.builtins import EXAMPLE51_MATRIX, example51
from iqvip.errors import ContractViolationError, InvalidConstantsError
from iqvip.problem import IqvipProblem
from iqvip.problem_base import AffineMap, ForwardMap
from iqvip.projections import spanned_box_family, whole_space_family


def clamp_oracle(x, mu=2.0):
    """Closed-form natural map of example51."""
    x = np.asarray(x, dtype=float)
    v = EXAMPLE51_MATRIX @ x
    lower, upper = np.minimum(0.0, x), np.maximum(0.0, x)
    return v - np.clip(v - mu * x, lower, upper)


class TestForwardMap:
    """Test cases for ForwardMap."""

    def test_affine_evaluates_matrix_product(self):
        """Test that the affine constructor computes A x + b."""
        V = ForwardMap.affine([[1.0, 2.0], [3.0, 4.0]], [1.0, -1.0])
        np.testing.assert_allclose(V(np.array([1.0, 1.0])), [4.0, 6.0])

    def test_eta_above_lipschitz_raises(self):
        """Test that eta > L is rejected."""
        with pytest.raises(InvalidConstantsError, match="exceeds"):
            ForwardMap(lambda x: x, lipschitz=1.0, strong_monotonicity=2.0)

    def test_nonpositive_constant_raises(self):
        """Test that a zero Lipschitz constant is rejected."""
        with pytest.raises(InvalidConstantsError, match="positive"):
            ForwardMap(lambda x: x, lipschitz=0.0)

    def test_constants_are_optional(self):
        """Test that maps without constants are allowed."""
        V = ForwardMap(lambda x: -x)
        assert not V.certified
        assert ForwardMap.affine(np.eye(2), None, 1.0, 1.0).certified

    def test_affine_map_rejects_non_square(self):
        """Test that a non-square matrix is rejected."""
        with pytest.raises(ContractViolationError, match="square"):
            AffineMap([[1.0, 2.0, 3.0]])


class TestNaturalMap:
    """Test cases for natural_map and residual_norm."""

    @pytest.fixture
    def problem(self):
        """Create the example51 problem."""
        return example51()

    def test_known_solution_is_zero_of_natural_map(self, problem):
        """Test that B vanishes at the known solution."""
        np.testing.assert_array_equal(
            problem.natural_map(problem.known_solution), [0.0, 0.0]
        )

    def test_example_value_at_7_5(self, problem):
        """Test the hand-evaluated value B(7, 5) = (14, 15.625)."""
        np.testing.assert_allclose(
            problem.natural_map([7.0, 5.0]), [14.0, 15.625], atol=1e-12
        )

    def test_residual_norm_at_7_5(self, problem):
        """Test the residual at (7, 5)."""
        assert problem.residual_norm([7.0, 5.0]) == pytest.approx(
            np.hypot(14.0, 15.625), abs=1e-12
        )
        assert problem.residual_norm([7.0, 5.0]) == pytest.approx(
            20.979, abs=1e-3
        )

    def test_regression_value_at_1_1(self, problem):
        """Test B(1, 1) against the clamp oracle."""
        value = problem.natural_map([1.0, 1.0])
        np.testing.assert_allclose(value, clamp_oracle([1.0, 1.0]))
        np.testing.assert_allclose(value, [2.0, 2.175], atol=1e-12)

    def test_matches_clamp_oracle_on_random_points(self, problem):
        """Test B against the closed-form oracle in all quadrants."""
        rng = np.random.default_rng(3)
        for x in rng.uniform(-10, 10, size=(200, 2)):
            np.testing.assert_allclose(
                problem.natural_map(x), clamp_oracle(x), atol=1e-12
            )

    def test_deterministic(self, problem):
        """Test that identical inputs give identical outputs."""
        x = np.array([0.3, -2.5])
        np.testing.assert_array_equal(
            problem.natural_map(x), problem.natural_map(x.copy())
        )

    def test_dimension_mismatch_raises(self, problem):
        """Test that a wrong-length input is rejected."""
        with pytest.raises(ContractViolationError, match="dimension 3"):
            problem.natural_map([1.0, 2.0, 3.0])

    def test_non_finite_input_raises(self, problem):
        """Test that NaN inputs are rejected."""
        with pytest.raises(ContractViolationError, match="NaN"):
            problem.natural_map([np.nan, 1.0])

    def test_lipschitz_bound(self, problem):
        """Test |B(a) - B(b)| <= (2L + rho + mu) |a - b| on samples."""
        constant = 2 * 2.2 + 1.0 + 2.0
        rng = np.random.default_rng(11)
        for a, b in rng.uniform(-10, 10, size=(1000, 2, 2)):
            lhs = np.linalg.norm(problem.natural_map(a) - problem.natural_map(b))
            assert lhs <= constant * np.linalg.norm(a - b) + 1e-9

    def test_whole_space_family_gives_mu_x(self):
        """Test that psi = R^n yields B(x) = mu x."""
        problem = IqvipProblem(
            ForwardMap.affine(EXAMPLE51_MATRIX),
            whole_space_family(),
            1.5,
            dimension=2,
        )
        np.testing.assert_allclose(
            problem.natural_map([2.0, -4.0]), [3.0, -6.0]
        )


class TestSolutionChecks:
    """Test cases for is_solution and the known solution."""

    def test_is_solution_at_known_solution(self):
        """Test that x* is accepted at tolerance 1e-9."""
        problem = example51()
        assert problem.is_solution(problem.known_solution, 1e-9)

    def test_offset_point_is_not_solution(self):
        """Test that x* plus a large offset is rejected."""
        problem = example51()
        assert not problem.is_solution([5.0, -3.0], 1e-9)

    def test_nonpositive_tol_raises(self):
        """Test that tol <= 0 is rejected."""
        with pytest.raises(ContractViolationError, match="tol"):
            example51().is_solution([0.0, 0.0], 0.0)

    def test_wrong_known_solution_raises(self):
        """Test that a bogus known solution is rejected on construction."""
        with pytest.raises(ContractViolationError, match="residual"):
            IqvipProblem(
                ForwardMap.affine(EXAMPLE51_MATRIX),
                spanned_box_family(),
                2.0,
                dimension=2,
                known_solution=[1.0, 1.0],
            )

    def test_known_solution_is_read_only(self):
        """Test that the stored solution cannot be mutated in place."""
        problem = example51()
        with pytest.raises(ValueError):
            problem.known_solution[0] = 1.0

    def test_with_known_solution_returns_copy(self):
        """Test that with_known_solution leaves the original untouched."""
        problem = IqvipProblem(
            ForwardMap.affine(EXAMPLE51_MATRIX),
            spanned_box_family(),
            2.0,
            dimension=2,
        )
        solved = problem.with_known_solution([0.0, 0.0])
        assert problem.known_solution is None
        assert solved.distance_to_solution([3.0, 4.0]) == pytest.approx(5.0)

    def test_nonpositive_mu_raises(self):
        """Test that mu <= 0 is rejected."""
        with pytest.raises(ContractViolationError, match="mu"):
            IqvipProblem(
                ForwardMap.affine(EXAMPLE51_MATRIX),
                spanned_box_family(),
                0.0,
                dimension=2,
            )
