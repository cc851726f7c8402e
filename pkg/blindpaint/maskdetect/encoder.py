from ..tensor import Linear, ops
from .attention import dual_attention, merge_heads, self_attention, split_heads
from .embed import FEATURE_STRIDE, from_patches

class EncoderLayer:

  def __init__(self, store, name, channels, heads, mlp_hidden, frequency_channels=0):
    self.heads = heads
    self.query = Linear(store, f'{name}.query', channels, channels)
    self.key = Linear(store, f'{name}.key', channels, channels)
    self.value = Linear(store, f'{name}.value', channels, channels)
    self.fuse = None
    if frequency_channels:
      self.fuse = Linear(store, f'{name}.fuse', heads + frequency_channels, heads)
    self.mlp_in = Linear(store, f'{name}.mlp_in', channels, mlp_hidden)
    self.mlp_out = Linear(store, f'{name}.mlp_out', mlp_hidden, channels)

  def __call__(self, tokens, frequency_maps=None):
    attention = self_attention(tokens, self.query, self.key, self.heads)
    weights = dual_attention(attention, frequency_maps, self.fuse)

    values = split_heads(self.value(tokens), self.heads)
    x = ops.add(tokens, merge_heads(ops.matmul(weights, values), tokens.shape))
    x = ops.add(x, self.mlp_out(ops.relu(self.mlp_in(x))))
    return x, weights

def transformer_encoder_stack(seq, layers, frequency_maps=None):
  """
  Runs the encoder layers over the patch tokens, reassembles the patches into
  a feature map and pools it to T at 1/8 resolution. Returns T and the
  per-layer dual attention maps.
  """
  tokens = seq.tokens
  maps = []
  for layer in layers:
    tokens, weights = layer(tokens, frequency_maps)
    maps.append(weights)
  features = from_patches(tokens, seq.grid[0], seq.patch_size)
  return ops.avg_pool(features, FEATURE_STRIDE), maps
