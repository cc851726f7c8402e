import numpy as np

def to_nchw(images):
  """H×W×C or N×H×W×C arrays → N×C×H×W float64."""
  data = np.asarray(getattr(images, 'data', images), dtype=np.float64)
  if data.ndim == 2:
    data = data[:, :, None]
  if data.ndim == 3:
    data = data[None]
  return np.ascontiguousarray(data.transpose(0, 3, 1, 2))

def to_nhwc(batch):
  data = np.asarray(getattr(batch, 'data', batch), dtype=np.float64)
  return np.ascontiguousarray(data.transpose(0, 2, 3, 1))

def mask_channel(masks):
  """H×W or N×H×W masks → N×1×H×W."""
  data = np.asarray(getattr(masks, 'data', masks), dtype=np.float64)
  if data.ndim == 2:
    data = data[None]
  return data[:, None]
