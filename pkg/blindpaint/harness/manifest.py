import os
from dataclasses import dataclass
from typing import Optional

from ..errors import ParseError

@dataclass
class ManifestEntry:
  corrupted: str
  mask: str
  gt: str
  landmarks: Optional[str] = None

  def fields(self):
    values = [ self.corrupted, self.mask, self.gt ]
    if self.landmarks:
      values.append(self.landmarks)
    return values

  def resolve(self, base_dir):
    def join(p):
      return p if p is None or os.path.isabs(p) else os.path.join(base_dir, p)
    return ManifestEntry(join(self.corrupted), join(self.mask), join(self.gt), join(self.landmarks))

def parse_manifest(text):
  """Tab-separated lines: corrupted, mask, gt and an optional landmark file."""
  entries = []
  offset = 0
  for line in text.split('\n'):
    stripped = line.rstrip('\r')
    if stripped.strip():
      parts = stripped.split('\t')
      if len(parts) not in (3, 4) or not all(parts):
        raise ParseError(f'Manifest lines need 3 or 4 tab-separated paths, got {len(parts)}', offset)
      entries.append(ManifestEntry(*parts))
    offset += len(line.encode('utf-8')) + 1
  return entries

def read_manifest(path):
  with open(path, 'r', encoding='utf-8') as f:
    entries = parse_manifest(f.read())
  base_dir = os.path.dirname(os.path.abspath(path))
  return [ entry.resolve(base_dir) for entry in entries ]

def write_manifest(path, entries):
  with open(path, 'w', encoding='utf-8', newline='\n') as f:
    for entry in entries:
      f.write('\t'.join(entry.fields()) + '\n')
