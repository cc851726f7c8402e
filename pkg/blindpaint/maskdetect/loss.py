import numpy as np

from ..errors import ContractError, DimensionError
from ..tensor import as_tensor, ops

BCE_CLAMP = 1e-6
DICE_EPS = 1e-6

def check_binary(mask, name='mask'):
  mask = np.asarray(getattr(mask, 'data', mask), dtype=np.float64)
  if not np.all((mask == 0.0) | (mask == 1.0)):
    raise ContractError(f'{name} must be binary (values in {{0, 1}})')
  return mask

def detection_terms(prob, gt):
  """(BCE, dice) for probabilities and a binary target of the same shape; dice is per-sample then averaged."""
  prob = as_tensor(prob)
  gt = check_binary(gt, 'Ground-truth mask')
  if gt.shape != prob.shape:
    raise DimensionError(f'Mask shape {gt.shape} does not match prediction {prob.shape}')

  p = ops.clip(prob, BCE_CLAMP, 1.0 - BCE_CLAMP)
  likelihood = ops.add(ops.mul(gt, ops.log(p)), ops.mul(1.0 - gt, ops.log(ops.sub(1.0, p))))
  bce = ops.scale(ops.mean(likelihood), -1.0)

  axes = tuple(range(1, p.ndim)) if p.ndim == 3 else None
  overlap = ops.sum(ops.mul(p, gt), axis=axes)
  denominator = ops.add(ops.sum(p, axis=axes), gt.sum(axis=axes) + DICE_EPS)
  dice = ops.mean(ops.sub(1.0, ops.scale(ops.div(overlap, denominator), 2.0)))
  return bce, dice

def detection_loss(prob, gt):
  bce, dice = detection_terms(prob, gt)
  return ops.add(bce, dice)
