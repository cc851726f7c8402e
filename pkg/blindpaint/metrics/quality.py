import math

import numpy as np
from scipy.ndimage import gaussian_filter

from ..errors import ContractError, DimensionError
from ..frequency import luma

PSNR_CAP = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2

def _pair(pred, gt):
  pred = np.asarray(getattr(pred, 'data', pred), dtype=np.float64)
  gt = np.asarray(getattr(gt, 'data', gt), dtype=np.float64)
  if pred.shape != gt.shape:
    raise DimensionError(f'Images differ in shape: {pred.shape} vs {gt.shape}')
  return pred, gt

def mse(pred, gt, mask=None):
  """Mean squared error, over the pixels where `mask` (H×W) is set when one is given."""
  pred, gt = _pair(pred, gt)
  squared = (pred - gt) ** 2
  if mask is None:
    return float(np.mean(squared))
  mask = np.asarray(getattr(mask, 'data', mask)) > 0.5
  if mask.shape != pred.shape[:2]:
    raise DimensionError(f'Mask {mask.shape} does not match image {pred.shape[:2]}')
  if not mask.any():
    raise ContractError('Masked error over an empty mask')
  return float(np.mean(squared[mask]))

def psnr(pred, gt, mask=None):
  """
  10·log10(1/MSE) for a dynamic range of 1; identical images give PSNR_CAP.
  With `mask`, only the pixels inside it count.
  """
  error = mse(pred, gt, mask)
  if error == 0.0:
    return PSNR_CAP
  return min(10.0 * math.log10(1.0 / error), PSNR_CAP)

def psnr_capped(pred, gt):
  return mse(pred, gt) == 0.0

def ssim(pred, gt):
  """
  Mean local SSIM on luma with an 11×11 Gaussian window (σ = 1.5), border
  sites whose window would leave the image excluded.
  """
  pred, gt = _pair(pred, gt)
  x, y = luma(pred), luma(gt)
  h, w = x.shape
  if h < SSIM_WINDOW or w < SSIM_WINDOW:
    raise ContractError(f'SSIM needs at least {SSIM_WINDOW}×{SSIM_WINDOW} pixels, got {h}×{w}')

  # truncate 3.5σ gives a radius of 5, an 11-tap window
  def blur(z):
    return gaussian_filter(z, SSIM_SIGMA, truncate=3.5)

  ux, uy = blur(x), blur(y)
  vx = blur(x * x) - ux * ux
  vy = blur(y * y) - uy * uy
  vxy = blur(x * y) - ux * uy

  numerator = (2 * ux * uy + SSIM_C1) * (2 * vxy + SSIM_C2)
  denominator = (ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2)
  pad = SSIM_WINDOW // 2
  return float(np.mean((numerator / denominator)[pad:h - pad, pad:w - pad]))
