from ..tensor import Conv2d, ops

class UpsampleHead:
  """Three (×2 bilinear, 1×1 conv, relu) stages and a 1×1 conv to one logit channel."""

  def __init__(self, store, name, in_channels, channels=(32, 16, 8)):
    self.stages = []
    for i, width in enumerate(channels):
      self.stages.append(Conv2d(store, f'{name}.stage{i}', in_channels, width, 1))
      in_channels = width
    self.out = Conv2d(store, f'{name}.out', in_channels, 1, 1)

  def __call__(self, features):
    x = features
    for conv in self.stages:
      x = ops.relu(conv(ops.bilinear_upsample(x, 2)))
    logits = self.out(x)
    n, _, h, w = logits.shape
    return ops.reshape(logits, (n, h, w))

def upsample_head(features, head):
  return head(features)
