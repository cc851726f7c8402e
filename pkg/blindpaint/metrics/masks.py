import numpy as np

from ..errors import DimensionError
from ..tensor import no_grad
from ..utils import to_nchw

def _pair(a, b):
  a = np.asarray(getattr(a, 'data', a), dtype=np.float64)
  b = np.asarray(getattr(b, 'data', b), dtype=np.float64)
  if a.shape != b.shape:
    raise DimensionError(f'Masks differ in shape: {a.shape} vs {b.shape}')
  return a, b

def mask_mae(prob, gt):
  prob, gt = _pair(prob, gt)
  return float(100.0 * np.mean(np.abs(prob - gt)))

def iou_both_empty(pred, gt):
  pred, gt = _pair(pred, gt)
  return not pred.any() and not gt.any()

def mask_iou(pred, gt):
  """100·|∩|/|∪|; two empty masks count as a perfect match."""
  pred, gt = _pair(pred, gt)
  pred, gt = pred > 0.5, gt > 0.5
  union = np.logical_or(pred, gt).sum()
  if union == 0:
    return 100.0
  return float(100.0 * np.logical_and(pred, gt).sum() / union)

def identity_features(image, extractor, pooled=False):
  """
  Deepest extractor tap as an identity descriptor. By default the outer ring
  of sites (whose window reaches the zero padding) is dropped when at least
  3×3 sites exist, each channel loses its spatial mean, and the sites are
  flattened. `pooled=True` gives the plain global average pool instead.
  """
  with no_grad():
    deepest = extractor(to_nchw(image))[-1].data
  if pooled:
    return deepest.mean(axis=(2, 3)).reshape(-1)
  if min(deepest.shape[2:]) >= 3:
    deepest = deepest[:, :, 1:-1, 1:-1]
  return (deepest - deepest.mean(axis=(2, 3), keepdims=True)).reshape(-1)

def ics(pred, gt, extractor, pooled=False):
  """Cosine similarity of identity features; 0 when either vector vanishes."""
  a = identity_features(gt, extractor, pooled)
  b = identity_features(pred, extractor, pooled)
  norm = np.linalg.norm(a) * np.linalg.norm(b)
  if norm == 0.0:
    return 0.0
  return float(np.clip(a @ b / norm, -1.0, 1.0))

