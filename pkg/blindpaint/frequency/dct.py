from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import ContractError, DimensionError

def _array(x):
  return np.asarray(getattr(x, 'data', x), dtype=np.float64)

@lru_cache(maxsize=32)
def cosine_basis(n):
  """Orthonormal DCT-II matrix: row k holds the k-th basis vector sampled at n points."""
  k = np.arange(n)[:, None]
  i = np.arange(n)[None, :]
  basis = np.cos(np.pi * (2 * i + 1) * k / (2 * n))
  basis *= np.sqrt(2.0 / n)
  basis[0, :] = np.sqrt(1.0 / n)
  basis.flags.writeable = False
  return basis

@dataclass
class FrequencySpectrum:
  coeffs: np.ndarray

  @property
  def height(self):
    return self.coeffs.shape[0]

  @property
  def width(self):
    return self.coeffs.shape[1]

  def energy(self):
    return float(np.sum(self.coeffs * self.coeffs))

@dataclass
class HighPassConfig:
  alpha: float = 0.08

  def __post_init__(self):
    if not 0.0 < self.alpha < 1.0:
      raise ContractError(f'High-pass alpha must lie in (0, 1), got {self.alpha}')

def _check_channel(x, tag):
  if x.ndim != 2:
    raise DimensionError(f'{tag}: expected an H×W channel, got shape {x.shape}')
  if x.shape[0] < 1 or x.shape[1] < 1:
    raise DimensionError(f'{tag}: empty channel {x.shape}')

def dct2(channel):
  """Separable orthonormal DCT-II, rows then columns."""
  x = _array(channel)
  _check_channel(x, 'dct2')
  h, w = x.shape
  return FrequencySpectrum(cosine_basis(h) @ x @ cosine_basis(w).T)

def idct2(spectrum):
  coeffs = _array(spectrum.coeffs if isinstance(spectrum, FrequencySpectrum) else spectrum)
  _check_channel(coeffs, 'idct2')
  h, w = coeffs.shape
  return cosine_basis(h).T @ coeffs @ cosine_basis(w)

def dct2_reference(channel):
  """Direct double sum. O(H²W²); only for checking the separable path."""
  x = _array(channel)
  h, w = x.shape
  coeffs = np.zeros((h, w))
  rows = np.arange(h)
  cols = np.arange(w)
  for u in range(h):
    cu = np.sqrt(1.0 / h) if u == 0 else np.sqrt(2.0 / h)
    for v in range(w):
      cv = np.sqrt(1.0 / w) if v == 0 else np.sqrt(2.0 / w)
      total = 0.0
      for i in rows:
        for j in cols:
          total += x[i, j] * np.cos(np.pi * (2 * i + 1) * u / (2 * h)) * np.cos(np.pi * (2 * j + 1) * v / (2 * w))
      coeffs[u, v] = cu * cv * total
  return FrequencySpectrum(coeffs)

def low_band(height, width, alpha):
  u = np.arange(height)[:, None]
  v = np.arange(width)[None, :]
  return (u + v) < alpha * (height + width)

def high_pass(spectrum, cfg=None):
  """Zeroes every coefficient (u, v) with u + v < alpha·(H + W)."""
  cfg = cfg if cfg is not None else HighPassConfig()
  coeffs = spectrum.coeffs.copy()
  coeffs[low_band(spectrum.height, spectrum.width, cfg.alpha)] = 0.0
  return FrequencySpectrum(coeffs)
