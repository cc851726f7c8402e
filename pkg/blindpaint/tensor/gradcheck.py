import numpy as np

from .core import Graph, backward, no_grad

def relative_error(analytic, numeric):
  """‖a − n‖∞ / max(‖a‖∞, ‖n‖∞, 1e-12)."""
  analytic = np.asarray(analytic)
  numeric = np.asarray(numeric)
  scale = max(np.max(np.abs(analytic), initial=0.0), np.max(np.abs(numeric), initial=0.0), 1e-12)
  return float(np.max(np.abs(analytic - numeric), initial=0.0) / scale)

def analytic_gradients(fn, tensors):
  for t in tensors:
    t.grad = None
  with Graph():
    loss = fn()
    backward(loss)
  return [ np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors ]

def numerical_gradient(fn, tensor, h=1e-5, indices=None):
  """Central differences of scalar `fn()` w.r.t. selected entries of `tensor`."""
  flat = tensor.data.reshape(-1)
  if indices is None:
    indices = range(flat.size)
  grad = np.zeros(flat.size)
  with no_grad():
    for i in indices:
      original = flat[i]
      flat[i] = original + h
      plus = fn().item()
      flat[i] = original - h
      minus = fn().item()
      flat[i] = original
      grad[i] = (plus - minus) / (2 * h)
  return grad.reshape(tensor.shape)

def check_gradients(fn, tensors, h=1e-5, max_entries=None, seed=0):
  """
  Max relative error between backward() and central differences over
  `tensors`. With `max_entries`, each tensor is checked at that many
  seeded random positions instead of everywhere.
  """
  rng = np.random.default_rng(seed)
  analytic = analytic_gradients(fn, tensors)
  worst = 0.0
  for tensor, grad in zip(tensors, analytic):
    indices = None
    if max_entries is not None and tensor.size > max_entries:
      indices = np.sort(rng.choice(tensor.size, size=max_entries, replace=False))
    numeric = numerical_gradient(fn, tensor, h=h, indices=indices)
    if indices is not None:
      grad = grad.reshape(-1)[indices]
      numeric = numeric.reshape(-1)[indices]
    worst = max(worst, relative_error(grad, numeric))
  return worst
