from dataclasses import dataclass

from ..config import FromSettings
from ..inpaint.landmarks import NUM_LANDMARKS
from ..tensor import Conv2d, as_tensor, ops
from .spectral import SpectralState, spectral_normalize

@dataclass
class DiscriminatorConfig(FromSettings):
  disc_channels: int = 64
  landmarks: int = NUM_LANDMARKS
  lsgan_standard: bool = True

# (stride, leaky relu after) per 4×4 conv; 70×70 receptive field
SCHEDULE = ( (2, True), (2, True), (2, True), (1, True), (1, False) )
KERNEL = 4

def receptive_field(schedule=SCHEDULE, kernel=KERNEL):
  field = 1
  for stride, _ in reversed(schedule):
    field = field * stride + (kernel - stride)
  return field

class Discriminator:
  """
  PatchGAN over [image, landmark heatmaps]. Every conv weight is spectrally
  normalized on use; each score judges one receptive-field patch.
  """

  def __init__(self, store, cfg=None):
    self.store = store
    self.cfg = cfg = cfg or DiscriminatorConfig()
    c = cfg.disc_channels
    widths = [ c, 2 * c, 4 * c, 8 * c, 1 ]

    self.convs = []
    self.states = []
    in_channels = 3 + cfg.landmarks
    for i, (width, (stride, _)) in enumerate(zip(widths, SCHEDULE)):
      conv = Conv2d(store, f'conv{i}', in_channels, width, KERNEL, stride=stride, padding=1)
      self.convs.append(conv)
      self.states.append(SpectralState(store, f'conv{i}.weight', conv.weight.shape))
      in_channels = width

  def __call__(self, image, landmarks, update=True):
    """N×1×h×w realness scores. `update` advances the power iteration."""
    x = ops.concat([ as_tensor(image), as_tensor(landmarks) ], axis=1)
    for conv, state, (_, activate) in zip(self.convs, self.states, SCHEDULE):
      x = conv(x, weight=spectral_normalize(conv.weight, state, update=update))
      if activate:
        x = ops.leaky_relu(x, 0.2)
    return x

def discriminate(image, landmarks, discriminator, update=True):
  return discriminator(image, landmarks, update=update)
