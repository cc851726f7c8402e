from ..errors import ContractError, DimensionError
from ..tensor import Conv2d, Deconv2d, as_tensor, ops
from .region_norm import RegionNorm

FUSIONS = ( 'tdrb', 'deconv', 'concat' )

def mask_fuse(upsampled, skip, m):
  """deconv(φ_d)·m + φ_e·(1 − m), sitewise."""
  upsampled, skip, m = as_tensor(upsampled), as_tensor(skip), as_tensor(m)
  if upsampled.shape[-2:] != skip.shape[-2:]:
    raise DimensionError(f'Upsampled features {upsampled.shape[-2:]} do not match skip features {skip.shape[-2:]}', axis=2)
  if m.shape[-2:] != skip.shape[-2:]:
    raise DimensionError(f'Mask {m.shape[-2:]} does not match skip features {skip.shape[-2:]}', axis=2)
  return ops.add(ops.mul(upsampled, m), ops.mul(skip, ops.sub(1.0, m)))

class TDRB:
  """
  Top-down refinement block. Upsamples decoder features, takes them inside
  the mask and the encoder skip outside it, mixes channels with a 1×1 conv,
  normalizes each region on its own and refines with a 3×3 conv.

  `fusion` picks the variant: 'tdrb' as above, 'deconv' drops the skip
  input, 'concat' stacks both sources instead of selecting by mask.
  """

  def __init__(self, store, name, in_channels, skip_channels, out_channels, upsample=True, fusion='tdrb'):
    if fusion not in FUSIONS:
      raise ContractError(f'Unknown fusion "{fusion}", expected one of {", ".join(FUSIONS)}')
    self.fusion = fusion
    if upsample:
      self.deconv = Deconv2d(store, f'{name}.deconv', in_channels, skip_channels, 4, stride=2, padding=1)
    else:
      self.deconv = Deconv2d(store, f'{name}.deconv', in_channels, skip_channels, 3, stride=1, padding=1)
    fuse_in = 2 * skip_channels if fusion == 'concat' else skip_channels
    self.fuse = Conv2d(store, f'{name}.fuse', fuse_in, out_channels, 1)
    self.norm = RegionNorm(store, f'{name}.norm', out_channels) if fusion == 'tdrb' else None
    self.refine = Conv2d(store, f'{name}.refine', out_channels, out_channels, 3)

  def fused_input(self, decoder, skip, m):
    """The tensor the 1×1 conv sees."""
    upsampled = self.deconv(decoder)
    if self.fusion == 'deconv':
      return upsampled
    if self.fusion == 'concat':
      if upsampled.shape[-2:] != skip.shape[-2:]:
        raise DimensionError(f'Upsampled features {upsampled.shape[-2:]} do not match skip features {skip.shape[-2:]}', axis=2)
      return ops.concat([ upsampled, skip ], axis=1)
    return mask_fuse(upsampled, skip, m)

  def __call__(self, decoder, skip, m):
    x = self.fuse(self.fused_input(decoder, skip, m))
    if self.norm is not None:
      x = self.norm(x, m)
    return self.refine(x)

def tdrb(decoder, skip, m, block):
  return block(decoder, skip, m)
