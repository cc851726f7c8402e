import math

from ..errors import DimensionError
from ..tensor import ops

def split_heads(tokens, heads):
  """N×P×S×C tokens → N×heads×P×(S·C/heads); heads partition the channels."""
  n, p, s, c = tokens.shape
  if c % heads:
    raise DimensionError(f'{c} channels cannot be split into {heads} heads', axis=3)
  x = ops.reshape(tokens, (n, p, s, heads, c // heads))
  x = ops.transpose(x, (0, 3, 1, 2, 4))
  return ops.reshape(x, (n, heads, p, s * (c // heads)))

def merge_heads(x, token_shape):
  n, p, s, c = token_shape
  heads = x.shape[1]
  x = ops.reshape(x, (n, heads, p, s, c // heads))
  x = ops.transpose(x, (0, 2, 3, 1, 4))
  return ops.reshape(x, (n, p, s, c))

def swap_last(x):
  axes = list(range(x.ndim))
  axes[-1], axes[-2] = axes[-2], axes[-1]
  return ops.transpose(x, axes)

def attention_weights(q, k):
  """softmax_j(q_i·k_j / √d_k) over the last two axes."""
  d_k = q.shape[-1]
  scores = ops.scale(ops.matmul(q, swap_last(k)), 1.0 / math.sqrt(d_k))
  return ops.softmax(scores, axis=-1)

def self_attention(tokens, query, key, heads):
  """Per-head attention maps, N×heads×P×P."""
  q = split_heads(query(tokens), heads)
  k = split_heads(key(tokens), heads)
  return attention_weights(q, k)

def dual_attention(attention, frequency_attention, fuse):
  """
  Fuses self attention (N×heads×P×P) with frequency maps (N×C×P×P) through
  a 1×1 conv over the stacked channels and a row softmax. Without a frequency
  path the self-attention rows are just renormalized.
  """
  if frequency_attention is None or fuse is None:
    return ops.div(attention, ops.sum(attention, axis=-1, keepdims=True))

  x = ops.concat([ attention, frequency_attention ], axis=1)
  x = ops.transpose(x, (0, 2, 3, 1))
  x = fuse(x)
  x = ops.transpose(x, (0, 3, 1, 2))
  return ops.softmax(x, axis=-1)
