import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from src.nncore.ops import conv2d, gap_over_axis, relu6, softmax
from src.nncore.tensor import Parameter, Tensor, is_grad_enabled, no_grad
from src.utils.error_handling import AutogradStateError, ShapeError


class TestBackward(unittest.TestCase):
    def test_backward_on_leaf(self):
        """A tensor with no recorded forward pass cannot start backward()."""
        with self.assertRaises(AutogradStateError):
            Tensor(np.ones(3), requires_grad=True).backward(np.ones(3))

    def test_non_scalar_needs_gradient(self):
        """backward() without a gradient is only allowed on scalars."""
        x = Tensor(np.ones((2, 3)), requires_grad=True)
        with self.assertRaises(ShapeError):
            relu6(x).backward()

    def test_scalar_default_gradient(self):
        """A scalar output back-propagates a unit gradient."""
        x = Tensor(np.array([[1.0, 2.0, 3.0, 4.0]]), requires_grad=True)
        out = gap_over_axis(gap_over_axis(x, axis=1), axis=0)
        out.backward()
        assert_allclose(x.grad, np.full((1, 4), 0.25))

    def test_repeated_backward_resets_intermediates(self):
        """Leaves accumulate across backward calls; intermediate grads are recomputed."""
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        out = gap_over_axis(relu6(x), axis=0)
        out.backward()
        out.backward()
        assert_allclose(x.grad, [1.0, 1.0])

    def test_gradient_shape_mismatch(self):
        """A gradient of the wrong shape is rejected."""
        x = Tensor(np.ones(3), requires_grad=True)
        with self.assertRaises(ShapeError):
            relu6(x).backward(np.ones(4))


class TestNoGrad(unittest.TestCase):
    def test_no_graph_recorded(self):
        """Inside no_grad, op outputs do not require gradients."""
        x = Tensor(np.ones((1, 1, 4, 4)), requires_grad=True)
        k = Tensor(np.ones((1, 1, 3, 3)), requires_grad=True)
        with no_grad():
            self.assertFalse(is_grad_enabled())
            y = conv2d(x, k)
        self.assertTrue(is_grad_enabled())
        self.assertFalse(y.requires_grad)
        with self.assertRaises(AutogradStateError):
            y.backward(np.ones(y.shape))

    def test_same_values_with_and_without_grad(self):
        """no_grad changes bookkeeping only, not values."""
        logits = Tensor(np.array([[0.3, -1.2]]), requires_grad=True)
        with no_grad():
            frozen = softmax(logits).data
        assert_array_equal(frozen, softmax(logits).data)


class TestParameter(unittest.TestCase):
    def test_assign(self):
        """assign replaces values and keeps the dtype."""
        param = Parameter(np.zeros((2, 2), dtype=np.float32), name="w")
        param.assign(np.ones((2, 2)))
        self.assertEqual(param.dtype, np.float32)
        assert_array_equal(param.value, 1.0)

    def test_assign_wrong_shape(self):
        """assign rejects a different shape."""
        param = Parameter(np.zeros(3), name="w")
        with self.assertRaises(ShapeError):
            param.assign(np.zeros(4))

    def test_gradient_defaults_to_zero(self):
        """A parameter with no gradient reports zeros."""
        param = Parameter(np.ones(3), name="w")
        assert_array_equal(param.gradient, np.zeros(3))
        assert_array_equal(param.rms_accumulator, np.zeros(3))


if __name__ == "__main__":
    unittest.main()
