"""Tests for the tape-based autodiff engine."""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))
from rpp_experiments.autodiff import tensor as T
from rpp_experiments.autodiff.gradcheck import finite_diff_check
from rpp_experiments.autodiff.tensor import Tape, Tensor
from rpp_experiments.core.errors import NumericalError, StructuralError


class TestTape:
    """Recording, gradients and error handling."""

    def setup_method(self):
        self.rng = np.random.default_rng(0)

    def test_square_sum_gradient(self):
        tape = Tape()
        x = tape.parameter("x", [1.0, -2.0, 3.0])
        grads = tape.backward(T.tsum(x * x))
        np.testing.assert_allclose(grads["x"], [2.0, -4.0, 6.0])

    def test_unreached_parameter_has_zero_gradient(self):
        tape = Tape()
        x = tape.parameter("x", [1.0, 2.0])
        tape.parameter("unused", np.ones((2, 2)))
        grads = tape.backward(T.tsum(x))
        np.testing.assert_array_equal(grads["unused"], np.zeros((2, 2)))

    def test_constants_are_not_recorded(self):
        tape = Tape()
        c = tape.constant(np.ones(3))
        out = c * 2.0
        assert not out.tracked
        assert len(tape) == 0

    def test_duplicate_parameter_rejected(self):
        tape = Tape()
        tape.parameter("w", 1.0)
        with pytest.raises(StructuralError, match="already registered"):
            tape.parameter("w", 2.0)

    def test_backward_needs_scalar(self):
        tape = Tape()
        x = tape.parameter("x", np.ones(3))
        with pytest.raises(StructuralError, match="scalar"):
            tape.backward(x * 2.0)

    def test_shape_errors(self):
        tape = Tape()
        a = tape.parameter("a", np.ones((2, 3)))
        with pytest.raises(StructuralError, match="matmul"):
            T.matmul(a, np.ones((2, 3)))
        with pytest.raises(StructuralError, match="add"):
            T.add(a, np.ones((4,)))
        with pytest.raises(StructuralError, match="reshape"):
            T.reshape(a, (4,))

    def test_debug_mode_catches_non_finite(self):
        tape = Tape(debug=True)
        x = tape.parameter("x", [0.0, 1.0])
        with np.errstate(divide="ignore"):
            with pytest.raises(NumericalError, match="reciprocal"):
                T.reciprocal(x)

    def test_sigmoid_is_stable(self):
        tape = Tape()
        x = tape.parameter("x", [-1000.0, 0.0, 1000.0])
        y = T.sigmoid(x)
        np.testing.assert_allclose(y.data, [0.0, 0.5, 1.0])
        grads = tape.backward(T.tsum(y))
        assert np.all(np.isfinite(grads["x"]))

    def test_item(self):
        assert Tensor([[2.5]]).item() == 2.5
        with pytest.raises(StructuralError):
            Tensor([1.0, 2.0]).item()


class TestGradientChecks:
    """Tape gradients against central differences."""

    def setup_method(self):
        self.rng = np.random.default_rng(1)

    def test_matmul_swish_chain(self):
        params = {
            "W": self.rng.standard_normal((4, 3)),
            "b": self.rng.standard_normal(4),
        }
        X = self.rng.standard_normal((5, 3))

        def f(tape, p):
            h = T.swish(T.matmul(X, p["W"].T) + p["b"])
            return T.mean(T.square(h))

        assert finite_diff_check(f, params) < 1e-4

    def test_indexing_and_concat(self):
        params = {"x": self.rng.standard_normal((3, 4))}

        def f(tape, p):
            left = p["x"][:, :2]
            right = p["x"][np.array([2, 0]), 1:]
            joined = T.concat([T.reshape(left, (-1,)), T.reshape(right, (-1,))])
            return T.tsum(T.sigmoid(joined) * joined)

        assert finite_diff_check(f, params) < 1e-4

    def test_embed_is_adjoint_of_getitem(self):
        tape = Tape()
        x = tape.parameter("x", self.rng.standard_normal(3))
        placed = T.embed(x, slice(1, 4), (5,))
        np.testing.assert_array_equal(placed.data[[0, 4]], [0.0, 0.0])
        grads = tape.backward(T.tsum(placed * np.arange(5.0)))
        np.testing.assert_allclose(grads["x"], [1.0, 2.0, 3.0])

    def test_sparse_matvec(self):
        matrix = sp.random(6, 4, density=0.5, random_state=2, format="csr")
        params = {"v": self.rng.standard_normal(4)}

        def f(tape, p):
            return T.l2_norm_sq(T.sparse_matvec(matrix, p["v"]))

        assert finite_diff_check(f, params) < 1e-4

    def test_bilinear_contract(self):
        params = {
            "x": self.rng.standard_normal((3, 2)),
            "y": self.rng.standard_normal((3, 4)),
            "M": self.rng.standard_normal((5, 2, 4)),
        }

        def f(tape, p):
            out = T.bilinear_contract(p["x"], p["y"], p["M"])
            return T.tsum(T.square(out))

        assert finite_diff_check(f, params) < 1e-4

    def test_broadcast_and_division(self):
        params = {
            "a": self.rng.standard_normal((3, 1)),
            "b": self.rng.uniform(1.0, 2.0, size=(1, 4)),
        }

        def f(tape, p):
            ratio = p["a"] / p["b"]
            return T.tsum(T.sqrt(ratio * ratio + 1.0))

        assert finite_diff_check(f, params) < 1e-4


class TestHigherOrder:
    """Differentiating through recorded backward passes."""

    def test_hessian_vector_product(self):
        tape = Tape()
        x = tape.parameter("x", [0.5, -1.0, 2.0])
        v = np.array([1.0, 2.0, -1.0])
        f = T.tsum(x * x * x)
        (g,) = tape.grad(f, [x], create_graph=True)
        np.testing.assert_allclose(g.data, 3 * x.data**2)
        hvp = tape.backward(T.tsum(g * v))
        np.testing.assert_allclose(hvp["x"], 6 * x.data * v)

    def test_gradient_of_energy_gradient(self):
        """The pattern behind Hamiltonian losses: a loss on dH/dz."""
        rng = np.random.default_rng(3)
        params = {"w": rng.standard_normal(4)}
        z0 = rng.standard_normal((2, 4))

        def f(tape, p):
            z = tape.watch(z0)
            energy = T.tsum(T.sigmoid(T.matmul(z, p["w"])) * 3.0)
            (dz,) = tape.grad(energy, [z], create_graph=True)
            return T.tsum(T.square(dz))

        assert finite_diff_check(f, params) < 1e-4

    def test_grad_without_create_graph_is_constant(self):
        tape = Tape()
        x = tape.parameter("x", [1.0, 2.0])
        (g,) = tape.grad(T.tsum(x * x), [x])
        assert not g.tracked


class TestProperties:
    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_matmul_gradient_closed_form(self, n, k, m, seed):
        rng = np.random.default_rng(seed)
        A_value = rng.standard_normal((n, k))
        B = rng.standard_normal((k, m))
        tape = Tape()
        A = tape.parameter("A", A_value)
        grads = tape.backward(T.tsum(A @ B))
        np.testing.assert_allclose(grads["A"], np.ones((n, m)) @ B.T, atol=1e-12)
