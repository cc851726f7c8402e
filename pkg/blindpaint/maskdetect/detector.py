from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..config import FromSettings
from ..frequency import HighPassConfig, frequency_batch, luma
from ..tensor import Tensor, as_tensor, ops
from ..utils import to_nhwc
from .embed import PatchEmbedding, patch_embed
from .encoder import EncoderLayer, transformer_encoder_stack
from .frequency_attention import FrequencyAttention
from .head import UpsampleHead
from .similarity import edge_features, patch_similarity

@dataclass
class DetectorConfig(FromSettings):
  embed_dim: int = 64
  grid: int = 8
  heads: int = 4
  layers: int = 4
  mlp_hidden: int = 128
  freq_channels: int = 2
  freq_tower: Tuple[int, ...] = (8, 16)
  freq_dim: int = 0
  head_channels: Tuple[int, ...] = (32, 16, 8)
  alpha: float = 0.08
  use_dual: bool = True
  use_fad: bool = True
  use_ps: bool = True
  threshold: float = 0.5

@dataclass
class DetectorOutput:
  mask_logits: Tensor  # N×H×W
  mask_prob: Tensor  # N×H×W
  edge_map: Optional[Tensor]  # N×h×w
  feature_map: Tensor  # N×C×h×w
  attention: List[Tensor] = field(default_factory=list)
  frequency: Optional[np.ndarray] = None

  def binarize(self, threshold=0.5):
    return (self.mask_prob.data > threshold).astype(np.float64)

class Detector:
  """
  Predicts where an image was corrupted, without being told. Patch tokens
  attend to each other under attention fused with frequency-derived maps,
  the pooled features are sharpened by local patch similarity, and a light
  upsampling head produces per-pixel mask logits.
  """

  def __init__(self, store, cfg=None):
    self.store = store
    self.cfg = cfg = cfg or DetectorConfig()

    self.embedding = PatchEmbedding(store, 'embed', 3, cfg.embed_dim, cfg.grid)
    self.frequency_attention = None
    frequency_channels = 0
    if cfg.use_dual:
      frequency_channels = cfg.freq_channels
      self.frequency_attention = FrequencyAttention(
        store, 'freq', cfg.grid, cfg.freq_channels, cfg.freq_tower, cfg.freq_dim or None
      )
    self.layers = [
      EncoderLayer(store, f'encoder{i}', cfg.embed_dim, cfg.heads, cfg.mlp_hidden, frequency_channels)
      for i in range(cfg.layers)
    ]
    self.head = UpsampleHead(store, 'head', cfg.embed_dim, cfg.head_channels)

  def frequency(self, images):
    """High-passed luma maps, or plain luma when the anomaly filter is off."""
    if not self.cfg.use_fad:
      return np.stack([ luma(image) for image in to_nhwc(images) ])[:, None]
    return frequency_batch(to_nhwc(images), HighPassConfig(self.cfg.alpha))

  def __call__(self, images, frequency=None):
    """`images` is N×3×H×W in [0, 1]; `frequency` (N×1×H×W) is computed when omitted."""
    images = as_tensor(images)
    if frequency is None or not self.cfg.use_fad:
      frequency = self.frequency(images.data)

    seq = patch_embed(self.embedding, images)
    frequency_maps = self.frequency_attention(frequency) if self.frequency_attention else None
    features, attention = transformer_encoder_stack(seq, self.layers, frequency_maps)

    edge_map = None
    fused = features
    if self.cfg.use_ps:
      edge_map = patch_similarity(features)
      fused = edge_features(features, edge_map)

    logits = self.head(fused)
    return DetectorOutput(
      mask_logits=logits,
      mask_prob=ops.sigmoid(logits),
      edge_map=edge_map,
      feature_map=features,
      attention=attention,
      frequency=np.asarray(getattr(frequency, 'data', frequency)),
    )
