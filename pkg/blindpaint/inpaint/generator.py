from dataclasses import dataclass
from typing import Tuple

from ..config import FromSettings
from ..tensor import Conv2d, Tensor, as_tensor, ops
from .blocks import DILATIONS, GeneratorEncoder
from .landmarks import HEATMAP_SIGMA, NUM_LANDMARKS
from .tdrb import TDRB

@dataclass
class GeneratorConfig(FromSettings):
  gen_channels: Tuple[int, int, int] = (64, 128, 256)
  dilations: Tuple[int, ...] = DILATIONS
  fusion: str = 'tdrb'
  landmarks: int = NUM_LANDMARKS
  landmark_sigma: float = HEATMAP_SIGMA

@dataclass
class GeneratorOutput:
  raw: Tensor  # N×3×H×W in [0, 1]
  composite: Tensor  # input outside the mask, raw inside

def mask_pyramid(mask, levels=3):
  """Nearest-neighbor halving of an N×1×H×W mask; level i is at 1/2^i resolution."""
  mask = as_tensor(mask)
  return [ mask if i == 0 else mask[:, :, ::2 ** i, ::2 ** i] for i in range(levels) ]

def composite(masked, raw, mask):
  return ops.add(ops.mul(masked, ops.sub(1.0, mask)), ops.mul(raw, mask))

class Generator:
  """
  Encoder over [masked image, mask, landmark heatmaps], then three TDRBs back
  to full resolution (two upsampling, one refining in place) and a 3×3 conv
  through tanh into [0, 1].
  """

  def __init__(self, store, cfg=None):
    self.store = store
    self.cfg = cfg = cfg or GeneratorConfig()
    c0, c1, c2 = cfg.gen_channels

    self.encoder = GeneratorEncoder(store, 'encoder', 3 + 1 + cfg.landmarks, cfg.gen_channels, cfg.dilations)
    self.blocks = [
      TDRB(store, 'tdrb1', c2, c1, c1, upsample=True, fusion=cfg.fusion),
      TDRB(store, 'tdrb2', c1, c0, c0, upsample=True, fusion=cfg.fusion),
      TDRB(store, 'tdrb3', c0, c0, c0, upsample=False, fusion=cfg.fusion),
    ]
    self.out = Conv2d(store, 'out', c0, 3, 3)

  def encode(self, masked, mask, landmarks):
    x = ops.concat([ as_tensor(masked), as_tensor(mask), as_tensor(landmarks) ], axis=1)
    return self.encoder(x)

  def __call__(self, masked, mask, landmarks):
    """
    `masked` is the binary-masked image (N×3×H×W), `mask` N×1×H×W and
    `landmarks` N×K×H×W heatmaps.
    """
    masked, mask = as_tensor(masked), as_tensor(mask)
    pyramid, x = self.encode(masked, mask, landmarks)
    masks = mask_pyramid(mask, len(pyramid))

    x = self.blocks[0](x, pyramid[1], masks[1])
    x = self.blocks[1](x, pyramid[0], masks[0])
    x = self.blocks[2](x, pyramid[0], masks[0])

    raw = ops.scale(ops.add(ops.tanh(self.out(x)), 1.0), 0.5)
    return GeneratorOutput(raw=raw, composite=composite(masked, raw, mask))

def encode(masked, mask, landmarks, generator):
  return generator.encode(masked, mask, landmarks)

def generate(masked, mask, landmarks, generator):
  return generator(masked, mask, landmarks).composite
