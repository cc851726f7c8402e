import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from PIL import Image, ImageDraw

from ..errors import ContractError, ProtocolError
from ..utils import make_rng

MAX_AREA = 0.6
INTERVALS = ( '0-10%', '10-20%', '20-30%', '30-40%', '40-50%', '50-60%' )

mask_generators = {}

def register_mask(name):
  def decorator(fn):
    mask_generators[name] = fn
    return fn
  return decorator

def get_mask_generator(name):
  if name not in mask_generators:
    raise ContractError(f'Unknown mask kind "{name}", expected one of {", ".join(sorted(mask_generators))}')
  return mask_generators[name]

@dataclass
class MaskSpec:
  kind: str = 'block'  # block | center | freeform | file
  area_interval: Optional[Tuple[float, float]] = None
  seed: int = 0
  strokes: int = 4

@dataclass
class BrushConfig:
  min_vertices: int = 4
  max_vertices: int = 12
  max_turn: float = 2 * math.pi / 5
  min_length: float = 10.0
  max_length: float = 40.0
  min_radius: float = 5.0
  max_radius: float = 20.0
  max_area: float = MAX_AREA
  max_attempts: int = 100

@register_mask('block')
def gen_block_mask(frame, seed):
  """An H/2 × W/2 block of ones at a uniformly random position."""
  h, w = frame
  bh, bw = h // 2, w // 2
  rng = make_rng(seed, 'block')
  top = int(rng.integers(0, h - bh + 1))
  left = int(rng.integers(0, w - bw + 1))
  mask = np.zeros((h, w))
  mask[top:top + bh, left:left + bw] = 1.0
  return mask

@register_mask('center')
def gen_center_mask(frame, seed=None):
  h, w = frame
  bh, bw = h // 2, w // 2
  mask = np.zeros((h, w))
  mask[(h - bh) // 2:(h - bh) // 2 + bh, (w - bw) // 2:(w - bw) // 2 + bw] = 1.0
  return mask

def is_center_block(mask):
  return np.array_equal(mask, gen_center_mask(mask.shape))

def _draw_stroke(draw, rng, h, w, scale, brush):
  vertices = int(rng.integers(brush.min_vertices, brush.max_vertices + 1))
  radius = rng.uniform(brush.min_radius, brush.max_radius) * scale
  x, y = rng.uniform(0, w), rng.uniform(0, h)
  heading = rng.uniform(0, 2 * math.pi)
  points = [ (x, y) ]
  for i in range(vertices - 1):
    # turns alternate around the drift direction
    turn = rng.uniform(0, brush.max_turn)
    heading += turn if i % 2 == 0 else -turn
    length = rng.uniform(brush.min_length, brush.max_length) * scale
    x = float(np.clip(x + length * math.cos(heading), 0, w - 1))
    y = float(np.clip(y + length * math.sin(heading), 0, h - 1))
    points.append((x, y))

  draw.line(points, fill=1, width=max(int(round(2 * radius)), 1))
  for px, py in points:
    draw.ellipse((px - radius, py - radius, px + radius, py + radius), fill=1)

@register_mask('freeform')
def gen_freeform_mask(frame, seed, strokes=4, brush=None):
  """
  Random brush walks rasterized with round caps. Masks covering nothing or
  more than `brush.max_area` of the frame are redrawn from the same stream.
  """
  if strokes < 1:
    raise ContractError(f'Free-form masks need at least one stroke, got {strokes}')
  brush = brush or BrushConfig()
  h, w = frame
  scale = min(h, w) / 256.0
  rng = make_rng(seed, 'freeform')

  for _ in range(brush.max_attempts):
    canvas = Image.new('L', (w, h), 0)
    draw = ImageDraw.Draw(canvas)
    for _ in range(strokes):
      _draw_stroke(draw, rng, h, w, scale, brush)
    mask = (np.asarray(canvas) > 0).astype(np.float64)
    fraction = mask.mean()
    if 0.0 < fraction <= brush.max_area:
      return mask

  raise ProtocolError(f'No free-form mask within area (0, {brush.max_area}] after {brush.max_attempts} attempts')

def mask_fraction(mask):
  mask = np.asarray(mask)
  return float(mask.sum()) / mask.size

def classify_area(mask):
  """Area interval index 0..5 in steps of 10%; the last interval includes 60%."""
  mask = np.asarray(mask)
  count = int(round(float(mask.sum())))
  total = mask.size
  if 10 * count > 6 * total:
    raise ProtocolError(f'Mask covers {100.0 * count / total:.2f}% of the frame; the protocol stops at 60%')
  return min((10 * count) // total, len(INTERVALS) - 1)
