from dataclasses import dataclass
from typing import Tuple

from ..config import FromSettings
from ..tensor import Conv2d, ParamStore, as_tensor, ops

@dataclass
class ExtractorConfig(FromSettings):
  extractor_channels: Tuple[int, ...] = (16, 32, 64, 128, 256)
  extractor_seed: int = 1234

class FeatureExtractor:
  """
  Fixed random conv tower standing in for a pretrained perceptual network.
  Five relu taps; the first keeps the input resolution and each later one
  halves it. Weights come from `seed` and are frozen at construction.
  """

  def __init__(self, channels=(16, 32, 64, 128, 256), seed=1234):
    store = ParamStore(seed)
    self.convs = []
    in_channels = 3
    for i, width in enumerate(channels):
      stride = 1 if i == 0 else 2
      self.convs.append(Conv2d(store, f'stage{i}', in_channels, width, 3, stride=stride, padding=1))
      in_channels = width

    self.store = store.snapshot()
    for conv in self.convs:
      conv.store = self.store

  @classmethod
  def from_config(cls, cfg):
    return cls(cfg.extractor_channels, cfg.extractor_seed)

  @property
  def num_taps(self):
    return len(self.convs)

  def __call__(self, images):
    x = as_tensor(images)
    taps = []
    for conv in self.convs:
      x = ops.relu(conv(x))
      taps.append(x)
    return taps
