from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..adversary import (
  Discriminator, DiscriminatorConfig, SpectralState, discriminator_adversarial_loss, generator_adversarial_loss,
  spectral_normalize,
)
from ..errors import ContractError
from ..inpaint import TDRB, LongShortAttention, RegionNorm, ResidualBlock
from ..losses import FeatureExtractor, perceptual_loss, reconstruction_loss, style_loss, tv_loss
from ..maskdetect import EncoderLayer, UpsampleHead, detection_loss, edge_features, patch_similarity
from ..tensor import ParamStore, Tensor, check_gradients, ops
from ..utils import derive_seed, make_rng

TOLERANCE = 1e-4
MAX_ENTRIES = 24

check_registry = OrderedDict()

def register_check(name):
  def decorator(fn):
    check_registry[name] = fn
    return fn
  return decorator

def list_checks():
  return list(check_registry.keys())

@dataclass
class CheckResult:
  name: str
  error: float
  tensors: int
  tolerance: float = TOLERANCE

  @property
  def passed(self):
    return self.error < self.tolerance

def _input(rng, *shape):
  return Tensor(rng.standard_normal(shape), requires_grad=True)

def _projected(rng, forward):
  """Turns a tensor-valued `forward()` into a scalar with a fixed random readout."""
  readout = {}
  def fn():
    out = forward()
    if 'w' not in readout:
      readout['w'] = rng.standard_normal(out.shape)
    return ops.sum(ops.mul(out, readout['w']))
  return fn

def _params(store):
  return [ t for _, t in store.parameters() ]

def _binary(rng, *shape):
  return (rng.random(shape) > 0.5).astype(np.float64)

@register_check('conv2d')
def check_conv2d(rng):
  x, w, b = _input(rng, 2, 3, 7, 7), _input(rng, 4, 3, 3, 3), _input(rng, 4)
  return _projected(rng, lambda: ops.conv2d(x, w, b, stride=2, padding=1)), [ x, w, b ]

@register_check('conv2d_dilated')
def check_conv2d_dilated(rng):
  x, w = _input(rng, 1, 2, 8, 8), _input(rng, 3, 2, 3, 3)
  return _projected(rng, lambda: ops.conv2d(x, w, stride=1, padding=2, dilation=2)), [ x, w ]

@register_check('deconv2d')
def check_deconv2d(rng):
  x, w, b = _input(rng, 2, 3, 4, 4), _input(rng, 3, 2, 4, 4), _input(rng, 2)
  return _projected(rng, lambda: ops.deconv2d(x, w, b, stride=2, padding=1)), [ x, w, b ]

@register_check('attention_layer')
def check_attention_layer(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  layer = EncoderLayer(store, 'layer', channels=4, heads=2, mlp_hidden=8, frequency_channels=2)
  tokens = _input(rng, 1, 4, 4, 4)
  frequency_maps = _input(rng, 1, 2, 4, 4)
  return _projected(rng, lambda: layer(tokens, frequency_maps)[0]), [ tokens, frequency_maps, *_params(store) ]

@register_check('patch_similarity')
def check_patch_similarity(rng):
  features = _input(rng, 1, 4, 4, 5)
  return _projected(rng, lambda: edge_features(features, patch_similarity(features))), [ features ]

@register_check('upsample_head')
def check_upsample_head(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  head = UpsampleHead(store, 'head', 4, (4, 3, 2))
  features = _input(rng, 1, 4, 2, 2)
  return _projected(rng, lambda: head(features)), [ features, *_params(store) ]

@register_check('region_norm')
def check_region_norm(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  norm = RegionNorm(store, 'norm', 3)
  store['norm.gamma'].data = rng.uniform(0.5, 1.5, 3)
  x = _input(rng, 2, 3, 4, 4)
  m = _binary(rng, 2, 1, 4, 4)
  return _projected(rng, lambda: norm(x, m)), [ x, *_params(store) ]

@register_check('tdrb')
def check_tdrb(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  block = TDRB(store, 'tdrb', in_channels=4, skip_channels=3, out_channels=3)
  decoder, skip = _input(rng, 1, 4, 3, 3), _input(rng, 1, 3, 6, 6)
  m = _binary(rng, 1, 1, 6, 6)
  return _projected(rng, lambda: block(decoder, skip, m)), [ decoder, skip, *_params(store) ]

@register_check('residual_block')
def check_residual_block(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  block = ResidualBlock(store, 'res', 3, dilation=2)
  x = _input(rng, 1, 3, 6, 6)
  return _projected(rng, lambda: block(x)), [ x, *_params(store) ]

@register_check('long_short_attention')
def check_long_short_attention(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  block = LongShortAttention(store, 'attention', 4, reduction=2)
  # Zero-initialized value projections would hide the query and key gradients
  for name in ('attention.value_post.weight', 'attention.value_pre.weight'):
    store[name].data = 0.3 * rng.standard_normal(store[name].shape)
  pre, post = _input(rng, 1, 4, 3, 3), _input(rng, 1, 4, 3, 3)
  return _projected(rng, lambda: block(pre, post)[0]), [ pre, post, *_params(store) ]

@register_check('detection_loss')
def check_detection_loss(rng):
  logits = _input(rng, 2, 6, 6)
  gt = _binary(rng, 2, 6, 6)
  return (lambda: detection_loss(ops.sigmoid(logits), gt)), [ logits ]

@register_check('reconstruction_loss')
def check_reconstruction_loss(rng):
  pred = _input(rng, 2, 3, 5, 5)
  gt = rng.standard_normal((2, 3, 5, 5))
  m = _binary(rng, 2, 1, 5, 5)
  return (lambda: reconstruction_loss(pred, gt, m)), [ pred ]

def _tiny_extractor(rng):
  return FeatureExtractor((3, 3, 4, 4, 4), seed=int(rng.integers(1 << 31)))

@register_check('perceptual_loss')
def check_perceptual_loss(rng):
  extractor = _tiny_extractor(rng)
  pred = Tensor(rng.random((1, 3, 16, 16)), requires_grad=True)
  gt = rng.random((1, 3, 16, 16))
  return (lambda: perceptual_loss(pred, gt, extractor)), [ pred ]

@register_check('style_loss')
def check_style_loss(rng):
  extractor = _tiny_extractor(rng)
  pred = Tensor(rng.random((1, 3, 16, 16)), requires_grad=True)
  gt = rng.random((1, 3, 16, 16))
  m = _binary(rng, 1, 1, 16, 16)
  return (lambda: style_loss(pred, gt, m, extractor)), [ pred ]

@register_check('tv_loss')
def check_tv_loss(rng):
  image = _input(rng, 1, 3, 6, 6)
  return (lambda: tv_loss(image)), [ image ]

@register_check('adversarial_loss')
def check_adversarial_loss(rng):
  d_fake, d_real = _input(rng, 2, 1, 3, 3), _input(rng, 2, 1, 3, 3)
  fn = lambda: ops.add(generator_adversarial_loss(d_fake), discriminator_adversarial_loss(d_fake, d_real))
  return fn, [ d_fake, d_real ]

@register_check('discriminator')
def check_discriminator(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  discriminator = Discriminator(store, DiscriminatorConfig(disc_channels=2, landmarks=2))
  image = Tensor(rng.random((1, 3, 32, 32)), requires_grad=True)
  landmarks = rng.random((1, 2, 32, 32))
  # Frozen power iteration, otherwise (u, v) drift between evaluations
  return _projected(rng, lambda: discriminator(image, landmarks, update=False)), [ image, *_params(store) ]

@register_check('spectral_norm')
def check_spectral_norm(rng):
  store = ParamStore(int(rng.integers(1 << 31)))
  weight = store.param('conv.weight', (4, 3, 3, 3))
  state = SpectralState(store, 'conv.weight', weight.shape)
  state.update(weight.data.reshape(4, -1), iterations=5)
  return _projected(rng, lambda: spectral_normalize(weight, state, update=False)), [ weight ]

def run_check(name, seed=0, h=1e-5, max_entries=MAX_ENTRIES, tolerance=TOLERANCE):
  rng = make_rng(seed, 'gradcheck', name)
  fn, tensors = check_registry[name](rng)
  error = check_gradients(fn, tensors, h=h, max_entries=max_entries, seed=derive_seed(seed, name))
  return CheckResult(name, error, len(tensors), tolerance)

def run_gradcheck(seed=0, names=None, max_entries=MAX_ENTRIES, tolerance=TOLERANCE, progress=None):
  """Runs the named checks (all by default) and returns one CheckResult each."""
  results = []
  for name in names or list_checks():
    if name not in check_registry:
      raise ContractError(f'Unknown gradient check "{name}", expected one of {", ".join(list_checks())}')
    results.append(run_check(name, seed, max_entries=max_entries, tolerance=tolerance))
    if progress:
      progress()
  return results
