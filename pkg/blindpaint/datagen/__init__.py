from .masks import (
  MaskSpec, BrushConfig, gen_block_mask, gen_center_mask, gen_freeform_mask, classify_area, mask_fraction,
  is_center_block, register_mask, get_mask_generator, INTERVALS, MAX_AREA,
)
from .fills import FillSource, choose_index
from .blend import blend, binary_masked
from .synth import draw_mask, parse_area, synthesize, sample_seed, MAX_DRAWS
