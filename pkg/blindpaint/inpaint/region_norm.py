import numpy as np

from ..errors import DimensionError
from ..tensor import as_tensor, ops

RN_EPS = 1e-5

def _region_masks(m, shape):
  m = np.asarray(getattr(m, 'data', m), dtype=np.float64)
  n, _, h, w = shape
  if m.ndim == 2:
    m = m[None, None]
  elif m.ndim == 3:
    m = m[:, None]
  if m.shape[-2:] != (h, w):
    raise DimensionError(f'Mask {m.shape[-2:]} does not match features {h}×{w}', axis=2)
  return np.broadcast_to(m, (n, 1, h, w))

def region_standardize(x, m):
  """
  Standardizes the masked and unmasked regions of each channel separately to
  mean 0 and variance 1. A region with no pixels contributes nothing; a
  constant region maps to zeros.
  """
  x = as_tensor(x)
  m = _region_masks(m, x.shape)
  out = None
  for region in (m, 1.0 - m):
    count = np.maximum(region.sum(axis=(2, 3), keepdims=True), 1.0)
    mean = ops.div(ops.sum(ops.mul(x, region), axis=(2, 3), keepdims=True), count)
    centered = ops.mul(ops.sub(x, mean), region)
    var = ops.div(ops.sum(ops.mul(centered, centered), axis=(2, 3), keepdims=True), count)
    normalized = ops.div(centered, ops.sqrt(ops.add(var, RN_EPS)))
    out = normalized if out is None else ops.add(out, normalized)
  return out

class RegionNorm:

  def __init__(self, store, name, channels):
    self.store = store
    self.name = name
    store.param(f'{name}.gamma', (channels,), init='ones')
    store.param(f'{name}.beta', (channels,), init='zeros')

  def __call__(self, x, m):
    c = x.shape[1]
    gamma = ops.reshape(self.store[f'{self.name}.gamma'], (1, c, 1, 1))
    beta = ops.reshape(self.store[f'{self.name}.beta'], (1, c, 1, 1))
    return ops.add(ops.mul(region_standardize(x, m), gamma), beta)

def region_normalize(x, m, norm=None):
  return norm(x, m) if norm is not None else region_standardize(x, m)
