import math
from dataclasses import dataclass
from typing import Tuple

from ..tensor import Conv2d, Tensor, ops

DILATIONS = (1, 2, 4, 8, 4, 2, 1)

@dataclass(frozen=True)
class FeaturePyramid:
  levels: Tuple[Tensor, ...]  # full, 1/2, 1/4 resolution

  def __getitem__(self, i):
    return self.levels[i]

  def __len__(self):
    return len(self.levels)

class ResidualBlock:

  def __init__(self, store, name, channels, dilation=1):
    self.dilated = Conv2d(store, f'{name}.dilated', channels, channels, 3, dilation=dilation)
    self.conv = Conv2d(store, f'{name}.conv', channels, channels, 3)

  def __call__(self, x):
    return ops.add(x, self.conv(ops.relu(self.dilated(x))))

class LongShortAttention:
  """
  Spatial self-attention over the post-residual features (long term) whose
  weights also gather the pre-residual features (short term). Value
  projections start at zero, so a fresh block is the identity on `post`.
  """

  def __init__(self, store, name, channels, reduction=8):
    inner = max(channels // reduction, 1)
    self.query = Conv2d(store, f'{name}.query', channels, inner, 1)
    self.key = Conv2d(store, f'{name}.key', channels, inner, 1)
    self.value_post = Conv2d(store, f'{name}.value_post', channels, channels, 1, init='zeros')
    self.value_pre = Conv2d(store, f'{name}.value_pre', channels, channels, 1, init='zeros')

  def weights(self, post):
    n, _, h, w = post.shape
    q = ops.reshape(self.query(post), (n, -1, h * w))
    k = ops.reshape(self.key(post), (n, -1, h * w))
    scores = ops.matmul(ops.transpose(q, (0, 2, 1)), k)
    return ops.softmax(ops.scale(scores, 1.0 / math.sqrt(q.shape[1])), axis=-1)

  def __call__(self, pre, post):
    n, c, h, w = post.shape
    weights = self.weights(post)
    gathered = ops.add(
      ops.matmul(ops.reshape(self.value_post(post), (n, c, h * w)), ops.transpose(weights, (0, 2, 1))),
      ops.matmul(ops.reshape(self.value_pre(pre), (n, c, h * w)), ops.transpose(weights, (0, 2, 1))),
    )
    return ops.add(post, ops.reshape(gathered, (n, c, h, w))), weights

def long_short_attention(pre, post, module):
  out, _ = module(pre, post)
  return out

class GeneratorEncoder:
  """Full-resolution conv, two stride-2 downsamples, dilated residual blocks, long-short attention."""

  def __init__(self, store, name, in_channels, channels=(64, 128, 256), dilations=DILATIONS):
    c0, c1, c2 = channels
    self.stem = Conv2d(store, f'{name}.stem', in_channels, c0, 3)
    self.down1 = Conv2d(store, f'{name}.down1', c0, c1, 4, stride=2, padding=1)
    self.down2 = Conv2d(store, f'{name}.down2', c1, c2, 4, stride=2, padding=1)
    self.blocks = [ ResidualBlock(store, f'{name}.res{i}', c2, d) for i, d in enumerate(dilations) ]
    self.attention = LongShortAttention(store, f'{name}.attention', c2)

  def __call__(self, x):
    e0 = ops.relu(self.stem(x))
    e1 = ops.relu(self.down1(e0))
    pre = ops.relu(self.down2(e1))
    post = pre
    for block in self.blocks:
      post = block(post)
    bottleneck, _ = self.attention(pre, post)
    return FeaturePyramid((e0, e1, pre)), bottleneck
