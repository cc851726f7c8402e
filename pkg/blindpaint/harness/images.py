import numpy as np
from PIL import Image

from ..errors import ContractError, DimensionError, ParseError, UnsupportedFormatError

WHITESPACE = b' \t\n\r\x0b\x0c'
RESAMPLE = {
  'bilinear': Image.Resampling.BILINEAR,
  'nearest': Image.Resampling.NEAREST,
}

class _HeaderReader:

  def __init__(self, data):
    self.data = data
    self.pos = 0

  def skip_space(self):
    while self.pos < len(self.data):
      byte = self.data[self.pos:self.pos + 1]
      if byte == b'#':
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1] not in (b'\n', b'\r'):
          self.pos += 1
      elif byte in WHITESPACE:
        self.pos += 1
      else:
        return

  def token(self, what):
    self.skip_space()
    start = self.pos
    while self.pos < len(self.data) and self.data[self.pos:self.pos + 1] not in WHITESPACE + b'#':
      self.pos += 1
    if start == self.pos:
      raise ParseError(f'Missing {what}', start)
    return self.data[start:self.pos], start

  def integer(self, what):
    raw, start = self.token(what)
    if not raw.isdigit():
      raise ParseError(f'Expected {what}, got {raw[:16]!r}', start)
    value = int(raw)
    if value < 1:
      raise ParseError(f'{what} must be positive', start)
    return value

def parse_netpbm(data):
  """Binary PPM (P6) or PGM (P5) with maxval 255 → H×W×C uint8."""
  reader = _HeaderReader(data)
  magic, _ = reader.token('magic number')
  if magic in (b'P1', b'P2', b'P3', b'P4'):
    raise UnsupportedFormatError(f'Netpbm variant {magic.decode()} is not supported; use binary P5 or P6')
  if magic not in (b'P5', b'P6'):
    raise ParseError(f'Not a PPM/PGM file (magic {magic[:8]!r})', 0)
  channels = 3 if magic == b'P6' else 1

  width = reader.integer('width')
  height = reader.integer('height')
  maxval_start = reader.pos
  maxval = reader.integer('maxval')
  if maxval != 255:
    raise UnsupportedFormatError(f'Only maxval 255 is supported, got {maxval} (at byte {maxval_start})')

  if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in WHITESPACE:
    raise ParseError('Expected a single whitespace byte after maxval', reader.pos)
  offset = reader.pos + 1

  size = width * height * channels
  if len(data) - offset < size:
    raise ParseError(f'Pixel data truncated: expected {size} bytes, found {len(data) - offset}', len(data))
  pixels = np.frombuffer(data, dtype=np.uint8, count=size, offset=offset)
  return pixels.reshape(height, width, channels)

def encode_netpbm(pixels):
  pixels = np.asarray(pixels, dtype=np.uint8)
  if pixels.ndim == 2:
    pixels = pixels[:, :, None]
  h, w, c = pixels.shape
  if c not in (1, 3):
    raise DimensionError(f'Can only write 1 or 3 channels, got {c}', axis=2)
  magic = b'P6' if c == 3 else b'P5'
  return magic + f'\n{w} {h}\n255\n'.encode('ascii') + pixels.tobytes()

def to_unit(pixels):
  return pixels.astype(np.float64) / 255.0

def to_bytes(image):
  """[0, 1] → 0..255 with round-half-up."""
  image = np.asarray(getattr(image, 'data', image), dtype=np.float64)
  return np.floor(np.clip(image, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)

def resize(image, size, resample='bilinear'):
  """Resizes an H×W×C float image to `size` = (H', W') channel by channel."""
  if resample not in RESAMPLE:
    raise ContractError(f'Unknown resample mode "{resample}"')
  h, w = size
  if image.shape[:2] == (h, w):
    return image
  channels = [
    np.asarray(Image.fromarray(image[:, :, c].astype(np.float32)).resize((w, h), RESAMPLE[resample]))
    for c in range(image.shape[2])
  ]
  return np.stack(channels, axis=2).astype(np.float64)

def _as_size(size):
  if size is None:
    return None
  if isinstance(size, int):
    return (size, size)
  return tuple(size)

def decode_image(data, size=None, resample='bilinear'):
  image = to_unit(parse_netpbm(data))
  size = _as_size(size)
  return resize(image, size, resample) if size else image

def load_image(path, size=None, resample='bilinear'):
  with open(path, 'rb') as f:
    data = f.read()
  return decode_image(data, size, resample)

def load_rgb(path, size=None, resample='bilinear'):
  image = load_image(path, size, resample)
  return np.repeat(image, 3, axis=2) if image.shape[2] == 1 else image

def load_mask(path, size=None):
  """PGM mask (255 = corrupted) → H×W array in {0, 1}."""
  image = load_image(path, size, 'nearest')
  return (image.mean(axis=2) >= 0.5).astype(np.float64)

def save_image(path, image):
  image = np.asarray(getattr(image, 'data', image), dtype=np.float64)
  with open(path, 'wb') as f:
    f.write(encode_netpbm(to_bytes(image)))

def save_mask(path, mask):
  mask = np.asarray(getattr(mask, 'data', mask), dtype=np.float64)
  save_image(path, (mask > 0.5).astype(np.float64))
