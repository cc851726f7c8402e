from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, ParseError

NUM_LANDMARKS = 68
HEATMAP_SIGMA = 2.0

landmark_providers = {}

def register_provider(name):
  def decorator(cls):
    landmark_providers[name] = cls
    return cls
  return decorator

def get_provider(name):
  if name not in landmark_providers:
    raise ContractError(f'Unknown landmark provider "{name}"')
  return landmark_providers[name]

def list_providers():
  return sorted(landmark_providers.keys())

@dataclass
class LandmarkMap:
  heatmap: np.ndarray  # H×W×K
  points: np.ndarray  # K×2, (x, y) pixels

  @property
  def count(self):
    return self.heatmap.shape[2]

def render_heatmaps(points, height, width, sigma=HEATMAP_SIGMA):
  """One unit-peak Gaussian channel per landmark, centered on its nearest pixel."""
  points = np.asarray(points, dtype=np.float64)
  cx = np.clip(np.round(points[:, 0]), 0, width - 1)
  cy = np.clip(np.round(points[:, 1]), 0, height - 1)
  ys = np.arange(height)[:, None, None]
  xs = np.arange(width)[None, :, None]
  d2 = (xs - cx[None, None, :]) ** 2 + (ys - cy[None, None, :]) ** 2
  return np.exp(-d2 / (2.0 * sigma * sigma))

def _arc(cx, cy, rx, ry, start, stop, count, endpoint=True):
  angles = np.linspace(start, stop, count, endpoint=endpoint)
  return np.stack([ cx + rx * np.cos(angles), cy + ry * np.sin(angles) ], axis=1)

def mean_face():
  """68 points of a frontal mean face in unit coordinates, in the usual ordering."""
  jaw = _arc(0.5, 0.45, 0.4, 0.42, np.pi, 0.0, 17)
  brow_x = np.linspace(0.2, 0.42, 5)
  brow_y = 0.36 - 0.04 * np.sin(np.linspace(0.0, np.pi, 5))
  left_brow = np.stack([ brow_x, brow_y ], axis=1)
  right_brow = np.stack([ 1.0 - brow_x[::-1], brow_y[::-1] ], axis=1)
  bridge = np.stack([ np.full(4, 0.5), np.linspace(0.42, 0.58, 4) ], axis=1)
  nostrils = np.stack([ np.linspace(0.42, 0.58, 5), 0.63 - 0.02 * np.sin(np.linspace(0.0, np.pi, 5)) ], axis=1)
  left_eye = _arc(0.33, 0.45, 0.07, 0.03, np.pi, 3 * np.pi, 6, endpoint=False)
  right_eye = _arc(0.67, 0.45, 0.07, 0.03, np.pi, 3 * np.pi, 6, endpoint=False)
  outer_mouth = _arc(0.5, 0.74, 0.14, 0.06, np.pi, 3 * np.pi, 12, endpoint=False)
  inner_mouth = _arc(0.5, 0.74, 0.09, 0.025, np.pi, 3 * np.pi, 8, endpoint=False)
  return np.concatenate([
    jaw, left_brow, right_brow, bridge, nostrils, left_eye, right_eye, outer_mouth, inner_mouth,
  ])

class LandmarkProvider:

  count = NUM_LANDMARKS
  sigma = HEATMAP_SIGMA

  def points(self, height, width):
    raise NotImplementedError

  def __call__(self, height, width):
    points = self.points(height, width)
    return LandmarkMap(render_heatmaps(points, height, width, self.sigma), points)

@register_provider('template')
class TemplateLandmarks(LandmarkProvider):
  """Mean-face layout scaled to the frame; used when no landmark file is given."""

  def __init__(self, count=NUM_LANDMARKS, sigma=HEATMAP_SIGMA):
    if count != NUM_LANDMARKS:
      raise ContractError(f'The template provider has {NUM_LANDMARKS} landmarks, {count} requested')
    self.count = count
    self.sigma = sigma

  def points(self, height, width):
    face = mean_face()
    return np.stack([ face[:, 0] * (width - 1), face[:, 1] * (height - 1) ], axis=1)

@register_provider('file')
class FileLandmarks(LandmarkProvider):
  """
  K lines of "x y" in pixel coordinates of a `source_size` frame
  (defaults to the requested frame); points are rescaled on request.
  """

  def __init__(self, path, count=None, sigma=HEATMAP_SIGMA, source_size=None):
    self.path = path
    self.sigma = sigma
    self.source_size = source_size
    with open(path, 'rb') as f:
      self.raw_points = parse_landmarks(f.read())
    if count is not None and len(self.raw_points) != count:
      raise ContractError(f'{path}: expected {count} landmarks, found {len(self.raw_points)}')
    self.count = len(self.raw_points)

  def points(self, height, width):
    points = self.raw_points.copy()
    if self.source_size:
      src_h, src_w = self.source_size
      points[:, 0] *= width / src_w
      points[:, 1] *= height / src_h
    return points

def parse_landmarks(data):
  points = []
  offset = 0
  for line in data.split(b'\n'):
    text = line.decode('utf-8', errors='replace').strip()
    if text:
      parts = text.split()
      try:
        if len(parts) != 2:
          raise ValueError
        points.append([ float(parts[0]), float(parts[1]) ])
      except ValueError:
        raise ParseError(f'Expected "x y", got "{text}"', offset)
    offset += len(line) + 1
  if not points:
    raise ParseError('No landmarks found', 0)
  return np.array(points)

def landmark_batch(providers, height, width):
  """Stacks N provider outputs into N×K×H×W."""
  return np.stack([ provider(height, width).heatmap.transpose(2, 0, 1) for provider in providers ])
