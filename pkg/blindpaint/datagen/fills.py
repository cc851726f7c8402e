from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ContractError
from ..utils import derive_seed, list_files, make_rng

IMAGE_EXTENSIONS = ( '.ppm', '.pgm' )

@dataclass
class FillSource:
  """Content pasted into the masked region: a constant gray level or random images from a directory."""
  kind: str = 'constant'
  value: float = 1.0
  directory: Optional[str] = None

  def __post_init__(self):
    if self.kind not in ('constant', 'image'):
      raise ContractError(f'Unknown fill kind "{self.kind}"')
    if self.kind == 'constant' and not 0.0 <= self.value <= 1.0:
      raise ContractError(f'Constant fill must lie in [0, 1], got {self.value}')
    self.files = []
    if self.kind == 'image':
      self.files = list_files(self.directory, IMAGE_EXTENSIONS)
      if not self.files:
        raise ContractError(f'No PPM/PGM images in fill directory {self.directory}')

  @classmethod
  def parse(cls, text):
    """`constant:<v>` or `dir:<path>`."""
    kind, _, arg = text.partition(':')
    if kind == 'constant':
      try:
        return cls('constant', float(arg or 1.0))
      except ValueError:
        raise ContractError(f'Bad constant fill "{text}"')
    if kind == 'dir' and arg:
      return cls('image', directory=arg)
    raise ContractError(f'Bad fill "{text}", expected constant:<v> or dir:<path>')

  def choose(self, seed, index):
    return choose_index(seed, index, 'fill', len(self.files))

  def sample(self, frame, seed, index=0):
    h, w = frame
    if self.kind == 'constant':
      return np.full((h, w, 3), self.value)

    from ..harness.images import load_image
    path = f'{self.directory}/{self.files[self.choose(seed, index)]}'
    image = load_image(path, size=(h, w))
    if image.shape[2] == 1:
      image = np.repeat(image, 3, axis=2)
    return image

def choose_index(seed, index, stream, count):
  """Seeded pick from `count` items; each stream name draws independently."""
  return int(make_rng(derive_seed(seed, index), stream).integers(0, count))
