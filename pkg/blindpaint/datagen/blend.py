import numpy as np

from ..errors import DimensionError
from ..tensor import Tensor, ops

def _mask_for(image, mask):
  mask = np.asarray(mask, dtype=np.float64)
  if mask.shape != image.shape[:2]:
    raise DimensionError(f'Mask {mask.shape} does not match image {image.shape[:2]}')
  return mask[:, :, None]

def blend(gt, mask, fill):
  """I_gt·(1 − M) + fill·M for H×W×C images and an H×W mask."""
  gt = np.asarray(gt, dtype=np.float64)
  fill = np.asarray(fill, dtype=np.float64)
  if fill.shape != gt.shape:
    raise DimensionError(f'Fill {fill.shape} does not match image {gt.shape}')
  m = _mask_for(gt, mask)
  return gt * (1.0 - m) + fill * m

def binary_masked(image, mask):
  """Sets masked pixels to white. Tensors (N×C×H×W, N×1×H×W) stay differentiable."""
  if isinstance(image, Tensor) or isinstance(mask, Tensor):
    return ops.add(ops.mul(image, ops.sub(1.0, mask)), mask)
  image = np.asarray(image, dtype=np.float64)
  m = _mask_for(image, mask)
  return image * (1.0 - m) + m
