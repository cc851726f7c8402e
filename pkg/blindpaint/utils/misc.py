import os

import numpy as np

MASK64 = (1 << 64) - 1

def expand_path(*args):
  return os.path.abspath(os.path.expanduser(os.path.join(*args)))

def mkdirp(*args):
  full_path = expand_path(*args)
  if not os.path.exists(full_path):
    os.makedirs(full_path)
  return full_path

def list_files(dir_path, extensions=None):
  """Sorted, non-hidden file names in `dir_path`, optionally filtered by extension."""
  names = [
    name for name in os.listdir(expand_path(dir_path))
    if not name.startswith('.') and os.path.isfile(expand_path(dir_path, name))
  ]
  if extensions:
    names = [ name for name in names if os.path.splitext(name)[1].lower() in extensions ]
  return sorted(names)

# `x or fallback` treats 0, 0.0 and empty arrays as missing, which is wrong
# for numeric settings. Only None means "not given".
def default(val, fallback):
  return val if val is not None else fallback

class DotDict(dict):
  __getattr__ = dict.__getitem__
  __setattr__ = dict.__setitem__
  __delattr__ = dict.__delitem__

  def __init__(self, source: dict = None):
    for key, value in default(source, {}).items():
      self[key] = value

def splitmix64(x):
  x = (x + 0x9E3779B97F4A7C15) & MASK64
  z = x
  z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
  z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
  return z ^ (z >> 31)

def _key_to_int(key):
  if isinstance(key, (int, np.integer)):
    return int(key) & MASK64
  # FNV-1a so string keys hash identically across processes
  h = 0xCBF29CE484222325
  for byte in str(key).encode('utf-8'):
    h = ((h ^ byte) * 0x100000001B3) & MASK64
  return h

def derive_seed(seed, *keys):
  """Mixes `seed` with each key through SplitMix64. Integer keys are XORed in (seed ⊕ index)."""
  state = splitmix64(int(seed) & MASK64)
  for key in keys:
    state = splitmix64(state ^ _key_to_int(key))
  return state

def make_rng(seed, *keys):
  return np.random.default_rng(derive_seed(seed, *keys))
