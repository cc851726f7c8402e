import math
from dataclasses import dataclass, field
from typing import List, Optional

from ..datagen import INTERVALS, classify_area, is_center_block
from .masks import ics, iou_both_empty, mask_iou, mask_mae
from .quality import psnr, psnr_capped, ssim

COLUMNS = ( 'id', 'interval', 'psnr', 'ssim', 'mae', 'iou', 'ics', 'flags' )
METRICS = ( 'psnr', 'ssim', 'mae', 'iou', 'ics' )

@dataclass
class EvalRow:
  sample_id: str
  interval: int
  psnr: float
  ssim: float
  ics: float
  mae: Optional[float] = None
  iou: Optional[float] = None
  center: bool = False
  flags: List[str] = field(default_factory=list)

  @property
  def interval_label(self):
    return INTERVALS[self.interval]

  def cells(self):
    return [
      self.sample_id,
      self.interval_label,
      *[ format_value(getattr(self, name)) for name in METRICS ],
      ','.join(self.flags) or '-',
    ]

def format_value(value):
  if value is None:
    return '-'
  return f'{value:.6f}'

def evaluate_sample(sample_id, pred, gt, mask, extractor, detected=None, detected_prob=None):
  """
  Scores one restored image against its ground truth. `mask` is the true
  mask (sets the area interval); `detected`/`detected_prob` are a predicted
  binary mask and probabilities when mask detection is being judged.
  """
  flags = []
  row = EvalRow(
    sample_id=sample_id,
    interval=classify_area(mask),
    psnr=psnr(pred, gt),
    ssim=ssim(pred, gt),
    ics=ics(pred, gt, extractor),
    center=is_center_block(mask),
    flags=flags,
  )
  if psnr_capped(pred, gt):
    flags.append('psnr_cap')
  if detected is not None:
    row.iou = mask_iou(detected, mask)
    row.mae = mask_mae(detected_prob if detected_prob is not None else detected, mask)
    if iou_both_empty(detected, mask):
      flags.append('iou_empty')
  return row

class EvalReport:

  def __init__(self, rows=None):
    self.rows = list(rows or [])

  def add(self, row):
    self.rows.append(row)

  def groups(self):
    groups = { label: [] for label in INTERVALS }
    groups['center'] = []
    groups['all'] = []
    for row in self.rows:
      groups[row.interval_label].append(row)
      if row.center:
        groups['center'].append(row)
      groups['all'].append(row)
    return groups

  def aggregates(self):
    """group → (count, {metric: mean over rows that have it})."""
    result = {}
    for name, rows in self.groups().items():
      means = {}
      for metric in METRICS:
        values = [ getattr(row, metric) for row in rows if getattr(row, metric) is not None ]
        means[metric] = sum(values) / len(values) if values else None
      result[name] = (len(rows), means)
    return result

  def to_tsv(self):
    lines = [ '\t'.join(COLUMNS) ]
    for row in self.rows:
      lines.append('\t'.join(row.cells()))
    lines.append('')
    lines.append('\t'.join([ '# group', 'count', *METRICS ]))
    for name, (count, means) in self.aggregates().items():
      if count:
        lines.append('\t'.join([ f'# {name}', str(count), *[ format_value(means[m]) for m in METRICS ] ]))
    return '\n'.join(lines) + '\n'

  def write(self, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
      f.write(self.to_tsv())

  def table_rows(self):
    rows = []
    for name, (count, means) in self.aggregates().items():
      if count:
        rows.append([ name, count, *[ '-' if means[m] is None or math.isnan(means[m]) else means[m] for m in METRICS ] ])
    return rows
