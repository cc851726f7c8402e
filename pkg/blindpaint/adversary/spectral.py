import numpy as np

from ..tensor import as_tensor, ops
from ..utils import make_rng

SN_EPS = 1e-12

def _unit(x):
  norm = np.linalg.norm(x)
  return x / max(norm, SN_EPS)

def power_iteration(matrix, u, iterations=1):
  v = None
  for _ in range(iterations):
    v = _unit(matrix.T @ u)
    u = _unit(matrix @ v)
  return u, v

def largest_singular_value(matrix, iterations=20, seed=0):
  """Power method on WᵀW, independent of any stored estimate."""
  matrix = np.asarray(matrix, dtype=np.float64)
  v = _unit(make_rng(seed, 'verify').standard_normal(matrix.shape[1]))
  for _ in range(iterations):
    v = _unit(matrix.T @ (matrix @ v))
  return float(np.sqrt(v @ (matrix.T @ (matrix @ v))))

class SpectralState:
  """
  Singular vector estimates (u, v) for one weight, kept as store buffers so
  they travel with checkpoints.
  """

  def __init__(self, store, name, shape):
    rows = shape[0]
    cols = int(np.prod(shape[1:]))
    self.u_name = f'{name}@sn.u'
    self.v_name = f'{name}@sn.v'
    rng = make_rng(store.seed, name, 'sn')
    self.store = store
    store.buffer(self.u_name, _unit(rng.standard_normal(rows)))
    store.buffer(self.v_name, _unit(rng.standard_normal(cols)))

  @property
  def u(self):
    return self.store[self.u_name].data

  @property
  def v(self):
    return self.store[self.v_name].data

  def update(self, matrix, iterations=1):
    u, v = power_iteration(matrix, self.u, iterations)
    self.store[self.u_name].data = u
    self.store[self.v_name].data = v

def spectral_normalize(weight, state, update=True, iterations=1):
  """
  W / σ̂ with σ̂ = uᵀWv after `iterations` power steps on (u, v). Gradients
  flow through W in both the numerator and σ̂; u and v are constants.
  """
  weight = as_tensor(weight)
  rows = weight.shape[0]
  matrix = weight.data.reshape(rows, -1)
  if update:
    state.update(matrix, iterations)

  sigma = ops.sum(ops.mul(ops.reshape(weight, (rows, -1)), np.outer(state.u, state.v)))
  if abs(sigma.item()) < SN_EPS:
    return weight
  return ops.div(weight, sigma)
