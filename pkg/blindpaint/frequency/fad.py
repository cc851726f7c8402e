import numpy as np

from ..errors import DimensionError
from .dct import HighPassConfig, dct2, high_pass, idct2

LUMA_WEIGHTS = np.array([ 0.299, 0.587, 0.114 ])

def luma(image):
  image = np.asarray(getattr(image, 'data', image), dtype=np.float64)
  if image.ndim == 2:
    return image
  if image.ndim != 3 or image.shape[2] not in (1, 3):
    raise DimensionError(f'Expected an H×W×C image with C in {{1, 3}}, got {image.shape}', axis=2)
  if image.shape[2] == 1:
    return image[:, :, 0]
  return image @ LUMA_WEIGHTS

def frequency_representation(image, cfg=None):
  """
  Frequency-aware view of an image: luma → DCT → drop the low band → inverse DCT.
  Returns an H×W×1 array. Smooth or constant regions map near zero; fill
  boundaries and texture discontinuities stand out.
  """
  spectrum = high_pass(dct2(luma(image)), cfg if cfg is not None else HighPassConfig())
  return idct2(spectrum)[:, :, None]

def frequency_batch(images, cfg=None):
  """N×H×W×C images → N×1×H×W frequency maps for the detector."""
  return np.stack([ frequency_representation(image, cfg)[:, :, 0] for image in images ])[:, None]
