import numpy as np

from ..errors import DimensionError
from ..tensor import Tensor, as_tensor, ops

def _check_pair(pred, gt, tag):
  if pred.shape != gt.shape:
    raise DimensionError(f'{tag}: prediction {pred.shape} and target {gt.shape} differ')

def reconstruction_loss(pred, gt, mask):
  """
  Masked ℓ1 over N_m, the number of masked elements across all channels.
  An empty mask gives 0.
  """
  pred, gt, mask = as_tensor(pred), as_tensor(gt), as_tensor(mask)
  _check_pair(pred, gt, 'reconstruction_loss')
  count = float(np.sum(np.broadcast_to(mask.data, pred.shape)))
  masked_error = ops.l1_norm(ops.mul(ops.sub(pred, gt), mask))
  if count == 0:
    return masked_error
  return ops.scale(masked_error, 1.0 / count)

def perceptual_loss(pred, gt, extractor):
  """Σ_p mean |φ_p(pred) − φ_p(gt)|."""
  pred, gt = as_tensor(pred), as_tensor(gt)
  _check_pair(pred, gt, 'perceptual_loss')
  total = None
  for a, b in zip(extractor(pred), extractor(gt)):
    term = ops.mean(ops.abs(ops.sub(a, b)))
    total = term if total is None else ops.add(total, term)
  return total

def gram(features):
  """φφᵀ over flattened sites: N×C×H×W → N×C×C."""
  n, c, h, w = features.shape
  flat = ops.reshape(features, (n, c, h * w))
  return ops.matmul(flat, ops.transpose(flat, (0, 2, 1)))

def style_loss(pred, gt, mask, extractor):
  """
  Gram-matrix distance of the masked inputs, per stage scaled by
  1/(N_p·H_p·W_p) inside the norm and 1/N_p² outside it. The ℓ1 norm sums
  over the whole batch, so the outer factor also divides by the batch size n:
  the loss is the per-sample mean, independent of n.
  """
  pred, gt, mask = as_tensor(pred), as_tensor(gt), as_tensor(mask)
  _check_pair(pred, gt, 'style_loss')
  n = pred.shape[0]
  total = None
  for a, b in zip(extractor(ops.mul(pred, mask)), extractor(ops.mul(gt, mask))):
    _, c, h, w = a.shape
    diff = ops.scale(ops.sub(gram(a), gram(b)), 1.0 / (c * h * w))
    term = ops.scale(ops.l1_norm(diff), 1.0 / (c * c * n))
    total = term if total is None else ops.add(total, term)
  return total

def tv_loss(image):
  """(‖∇_h I‖₁ + ‖∇_v I‖₁) / |I| with forward differences, no wraparound."""
  image = as_tensor(image)
  dh = ops.sub(image[..., :, 1:], image[..., :, :-1])
  dv = ops.sub(image[..., 1:, :], image[..., :-1, :])
  return ops.scale(ops.add(ops.l1_norm(dh), ops.l1_norm(dv)), 1.0 / image.size)

def total_loss(terms, weights):
  """Σ λ_name · term over recons, adv, perc, style and tv; missing terms count as 0."""
  total = Tensor(0.0)
  for name, weight in weights.items():
    term = terms.get(name)
    if term is None:
      continue
    total = ops.add(total, ops.scale(term, weight))
  return total
