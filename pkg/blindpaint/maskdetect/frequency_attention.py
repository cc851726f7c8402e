import math

from ..tensor import Conv2d, Linear, as_tensor, ops
from .attention import swap_last

class FrequencyAttention:
  """
  Maps the frequency representation F to C patch-by-patch attention maps.
  Every patch of F goes through the same strided conv tower and projection
  to a descriptor d_i, and map c scores pairs as d_i·W_c·d_jᵀ / √dim. Patches
  are processed independently, so reordering them permutes the maps.
  """

  def __init__(self, store, name, grid=8, channels=2, tower=(8, 16), dim=None):
    self.store = store
    self.name = name
    self.grid = grid
    self.channels = channels
    self.dim = dim or grid * grid

    self.tower = []
    in_channels = 1
    for i, width in enumerate(tower):
      self.tower.append(Conv2d(store, f'{name}.tower{i}', in_channels, width, 3, stride=2, padding=1))
      in_channels = width
    self.project = Linear(store, f'{name}.project', in_channels, self.dim)
    store.param(f'{name}.bilinear', (channels, self.dim, self.dim), fan_in=self.dim)

  def descriptors(self, frequency):
    frequency = as_tensor(frequency)
    n, _, h, w = frequency.shape
    g = self.grid
    ph, pw = h // g, w // g

    x = ops.reshape(frequency, (n, 1, g, ph, g, pw))
    x = ops.transpose(x, (0, 2, 4, 1, 3, 5))
    x = ops.reshape(x, (n * g * g, 1, ph, pw))
    for conv in self.tower:
      x = ops.relu(conv(x))
    x = ops.mean(x, axis=(2, 3))
    x = self.project(x)
    return ops.reshape(x, (n, 1, g * g, self.dim))

  def __call__(self, frequency):
    d = self.descriptors(frequency)
    scored = ops.matmul(d, self.store[f'{self.name}.bilinear'])
    maps = ops.matmul(scored, swap_last(d))
    return ops.scale(maps, 1.0 / math.sqrt(self.dim))

def frequency_attention(frequency, module):
  return module(frequency)
