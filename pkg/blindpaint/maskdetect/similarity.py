import numpy as np

from ..errors import DimensionError
from ..tensor import as_tensor, ops

def neighbor_counts(h, w):
  """|Ω| per site for a 3×3 neighborhood clamped to the frame."""
  rows = 3 - (np.arange(h) == 0) - (np.arange(h) == h - 1)
  cols = 3 - (np.arange(w) == 0) - (np.arange(w) == w - 1)
  return np.outer(rows, cols).astype(np.float64)

def patch_similarity(features):
  """
  Edge map E (N×h×w): mean cosine similarity of each feature vector with its
  3×3 neighborhood, itself included. Zero vectors contribute cosine 0.
  """
  features = as_tensor(features)
  n, c, h, w = features.shape
  if h < 3 or w < 3:
    raise DimensionError(f'Patch similarity needs at least 3×3 sites, got {h}×{w}', axis=2 if h < 3 else 3)

  unit = ops.l2_normalize(features, axis=1)
  padded = ops.pad2d(unit, 1)
  total = None
  for di in range(3):
    for dj in range(3):
      shifted = padded[:, :, di:di + h, dj:dj + w]
      cosine = ops.sum(ops.mul(unit, shifted), axis=1)
      total = cosine if total is None else ops.add(total, cosine)
  return ops.div(total, neighbor_counts(h, w))

def edge_features(features, edge_map):
  """F_edge = T + E, with E broadcast over channels."""
  n, h, w = edge_map.shape
  return ops.add(features, ops.reshape(edge_map, (n, 1, h, w)))
