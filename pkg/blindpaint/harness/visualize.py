import os

import numpy as np
from PIL import Image

from ..utils import expand_path, mkdirp
from .images import load_rgb, save_image, save_mask

def rescale(values):
  """Min-max stretch to [0, 1]; a constant map becomes zeros."""
  values = np.asarray(getattr(values, 'data', values), dtype=np.float64)
  lo, hi = values.min(), values.max()
  if hi - lo <= 0:
    return np.zeros_like(values)
  return (values - lo) / (hi - lo)

def enlarge(panel, size):
  """Nearest-neighbor blow-up of a small 2-D map to `size` = (H, W)."""
  h, w = size
  if panel.shape == (h, w):
    return panel
  return np.asarray(Image.fromarray(panel.astype(np.float32)).resize((w, h), Image.Resampling.NEAREST), dtype=np.float64)

def attention_panels(attention, layer=-1):
  """Per-head P×P dual attention maps of one encoder layer, each rescaled."""
  weights = attention[layer].data[0]
  return [ rescale(head) for head in weights ]

def run_visualize(image_path, inference, out_dir, image_size=None, layer=-1):
  """
  Dumps the panels behind one detection: the input, the frequency map F,
  the edge map E, the dual attention of each head and the predicted mask.
  """
  cfg = inference.configs
  image = load_rgb(image_path, image_size or cfg.train.image_size)
  out = inference.detect(image)
  size = image.shape[:2]
  stem = os.path.splitext(os.path.basename(image_path))[0]
  mkdirp(out_dir)

  def path(panel):
    return expand_path(out_dir, f'{stem}_{panel}')

  written = []
  def dump(panel, values, mask=False):
    target = path(panel)
    (save_mask if mask else save_image)(target, values)
    written.append(target)

  dump('image.ppm', image)
  dump('frequency.pgm', rescale(out.frequency[0, 0]))
  if out.edge_map is not None:
    dump('edge.pgm', enlarge(rescale(out.edge_map.data[0]), size))
  for head, panel in enumerate(attention_panels(out.attention, layer)):
    dump(f'attention_h{head}.pgm', panel)
  dump('mask.pgm', out.binarize(cfg.detector.threshold)[0], mask=True)
  return written
