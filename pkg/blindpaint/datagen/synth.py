from ..errors import ContractError, ProtocolError
from ..utils import derive_seed
from .blend import blend
from .masks import get_mask_generator, mask_fraction

MAX_DRAWS = 100

def sample_seed(seed, index):
  return derive_seed(seed ^ index)

def parse_area(text):
  """`lo:hi` area fractions, e.g. `0.1:0.2`."""
  try:
    lo, hi = [ float(part) for part in text.split(':') ]
  except ValueError:
    raise ContractError(f'Bad area interval "{text}", expected lo:hi')
  if not 0.0 <= lo <= hi <= 1.0:
    raise ContractError(f'Area interval must satisfy 0 <= lo <= hi <= 1, got {lo}:{hi}')
  return (lo, hi)

def draw_mask(frame, spec, seed):
  """
  One mask of `spec.kind`. With an `area_interval`, masks are redrawn from
  the same stream until their area fraction falls inside it.
  """
  generator = get_mask_generator(spec.kind)
  for attempt in range(MAX_DRAWS):
    draw_seed = derive_seed(seed, 'mask', attempt)
    if spec.kind == 'freeform':
      mask = generator(frame, draw_seed, spec.strokes)
    else:
      mask = generator(frame, draw_seed)
    if spec.area_interval is None:
      return mask
    lo, hi = spec.area_interval
    if lo <= mask_fraction(mask) <= hi:
      return mask
  raise ProtocolError(f'No {spec.kind} mask with area in [{lo}, {hi}] after {MAX_DRAWS} draws')

def synthesize(gt, index, spec, fill, mask=None):
  """
  One training triplet from a ground-truth image: (corrupted, mask). The mask
  and the fill come from separate seeded streams, so neither determines the
  other. `mask` supplies a precomputed one, required for `file` specs.
  """
  h, w = gt.shape[:2]
  seed = sample_seed(spec.seed, index)
  if mask is None:
    if spec.kind == 'file':
      raise ContractError('A file mask spec needs the mask to be supplied')
    mask = draw_mask((h, w), spec, seed)
  corrupted = blend(gt, mask, fill.sample((h, w), derive_seed(seed, 'fill'), index))
  return corrupted, mask
