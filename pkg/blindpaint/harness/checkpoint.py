import struct
import zlib
from collections import OrderedDict

import numpy as np

from ..errors import CheckpointError

MAGIC = b'FTDR1'
VERSION = 1
DTYPE_F32 = 0

def encode_checkpoint(tensors):
  """
  MAGIC, u16 version, u32 count, then per tensor: u16 name length, UTF-8
  name, u8 dtype, u8 rank, u32 dims, little-endian f32 payload. A CRC32 of
  everything before it closes the file.
  """
  parts = [ MAGIC, struct.pack('<HI', VERSION, len(tensors)) ]
  for name, array in tensors.items():
    array = np.asarray(array)
    encoded = name.encode('utf-8')
    parts.append(struct.pack('<H', len(encoded)))
    parts.append(encoded)
    parts.append(struct.pack('<BB', DTYPE_F32, array.ndim))
    parts.append(struct.pack(f'<{array.ndim}I', *array.shape))
    parts.append(np.ascontiguousarray(array, dtype='<f4').tobytes())
  body = b''.join(parts)
  return body + struct.pack('<I', zlib.crc32(body) & 0xFFFFFFFF)

class _Reader:

  def __init__(self, data):
    self.data = data
    self.pos = 0

  def take(self, size, what):
    if self.pos + size > len(self.data):
      raise CheckpointError(f'Checkpoint truncated while reading {what} at byte {self.pos}')
    chunk = self.data[self.pos:self.pos + size]
    self.pos += size
    return chunk

  def unpack(self, fmt, what):
    return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

def decode_checkpoint(data):
  if len(data) < len(MAGIC) + 10 or data[:len(MAGIC)] != MAGIC:
    raise CheckpointError('Not a checkpoint file (bad magic)')
  body, (crc,) = data[:-4], struct.unpack('<I', data[-4:])
  if zlib.crc32(body) & 0xFFFFFFFF != crc:
    raise CheckpointError('Checkpoint CRC mismatch')

  reader = _Reader(body)
  reader.take(len(MAGIC), 'magic')
  version, count = reader.unpack('<HI', 'header')
  if version != VERSION:
    raise CheckpointError(f'Unsupported checkpoint version {version}')

  tensors = OrderedDict()
  for _ in range(count):
    (name_length,) = reader.unpack('<H', 'name length')
    name = reader.take(name_length, 'name').decode('utf-8')
    dtype, rank = reader.unpack('<BB', f'"{name}" header')
    if dtype != DTYPE_F32:
      raise CheckpointError(f'"{name}": unknown dtype tag {dtype}')
    shape = reader.unpack(f'<{rank}I', f'"{name}" dims')
    size = int(np.prod(shape)) if rank else 1
    payload = reader.take(4 * size, f'"{name}" payload')
    tensors[name] = np.frombuffer(payload, dtype='<f4').astype(np.float64).reshape(shape)

  if reader.pos != len(body):
    raise CheckpointError(f'{len(body) - reader.pos} trailing bytes after the last tensor')
  return tensors

def save_checkpoint(path, tensors):
  with open(path, 'wb') as f:
    f.write(encode_checkpoint(tensors))
  return path

def load_checkpoint(path):
  try:
    with open(path, 'rb') as f:
      data = f.read()
  except OSError as e:
    raise CheckpointError(f'Cannot read checkpoint {path}: {e.strerror}')
  return decode_checkpoint(data)

def save_models(path, stores):
  """Writes several ParamStores into one checkpoint, names prefixed "<model>/"."""
  tensors = OrderedDict()
  for prefix, store in stores.items():
    for name, data in store.state_dict().items():
      tensors[f'{prefix}/{name}'] = data
  return save_checkpoint(path, tensors)

def load_models(path, stores, strict=False):
  """Loads the entries of `path` into matching stores; returns the loaded model names."""
  tensors = load_checkpoint(path)
  grouped = OrderedDict()
  for name, data in tensors.items():
    prefix, _, rest = name.partition('/')
    grouped.setdefault(prefix, OrderedDict())[rest] = data
  loaded = []
  for prefix, store in stores.items():
    if prefix in grouped:
      store.load_state(grouped[prefix], strict=strict)
      loaded.append(prefix)
    elif strict:
      raise CheckpointError(f'Checkpoint {path} has no "{prefix}" tensors')
  return loaded
