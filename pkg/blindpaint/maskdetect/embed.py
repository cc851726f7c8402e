from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import DimensionError
from ..tensor import Conv2d, Tensor, as_tensor, ops

# T and E live at 1/8 of the input resolution
FEATURE_STRIDE = 8

def sinusoidal_encoding(length, dim):
  position = np.arange(length)[:, None]
  index = np.arange(dim)[None, :]
  angle = position / np.power(10000.0, (2 * (index // 2)) / dim)
  return np.where(index % 2 == 0, np.sin(angle), np.cos(angle))

@dataclass
class PatchSequence:
  tokens: Tensor  # N×P×S×C, S pixels per patch, C channels
  grid: Tuple[int, int]
  patch_size: Tuple[int, int]
  position_encoding: np.ndarray  # P×Q

  @property
  def num_patches(self):
    return self.grid[0] * self.grid[1]

  @property
  def dim(self):
    return self.tokens.shape[2] * self.tokens.shape[3]

  def embeddings(self):
    """The flattened P×Q view per sample."""
    n = self.tokens.shape[0]
    return ops.reshape(self.tokens, (n, self.num_patches, self.dim))

def to_patches(x, grid):
  n, c, h, w = x.shape
  ph, pw = h // grid, w // grid
  x = ops.reshape(x, (n, c, grid, ph, grid, pw))
  x = ops.transpose(x, (0, 2, 4, 3, 5, 1))
  return ops.reshape(x, (n, grid * grid, ph * pw, c))

def from_patches(tokens, grid, patch_size):
  n, _, _, c = tokens.shape
  ph, pw = patch_size
  x = ops.reshape(tokens, (n, grid, grid, ph, pw, c))
  x = ops.transpose(x, (0, 5, 1, 3, 2, 4))
  return ops.reshape(x, (n, c, grid * ph, grid * pw))

def check_divisible(h, w, grid):
  for axis, size in ((2, h), (3, w)):
    if size % FEATURE_STRIDE or size % grid:
      raise DimensionError(
        f'Image side {size} must be divisible by {FEATURE_STRIDE} and by the patch grid {grid}', axis=axis
      )

class PatchEmbedding:
  """
  Full-resolution 3×3 conv stem, then an even grid split into patches.
  Each patch flattens to Q = (H/grid)·(W/grid)·embed_dim values, with a
  fixed sinusoidal encoding added once.
  """

  def __init__(self, store, name, in_channels=3, embed_dim=64, grid=8):
    self.grid = grid
    self.embed_dim = embed_dim
    self.stem = Conv2d(store, f'{name}.stem', in_channels, embed_dim, 3)

  def __call__(self, images):
    images = as_tensor(images)
    n, _, h, w = images.shape
    check_divisible(h, w, self.grid)

    x = ops.relu(self.stem(images))
    tokens = to_patches(x, self.grid)
    _, p, s, c = tokens.shape
    encoding = sinusoidal_encoding(p, s * c)
    tokens = ops.add(tokens, encoding.reshape(p, s, c))
    return PatchSequence(tokens, (self.grid, self.grid), (h // self.grid, w // self.grid), encoding)

def patch_embed(embedding, images):
  return embedding(images)
