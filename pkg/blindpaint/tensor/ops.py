"""
Differentiable operators. Every function takes Tensors (or array-likes, which
become constant Tensors), computes the forward value with numpy and records a
backward closure returning one gradient per input (None for inputs that do
not need one).
"""
import math

import numpy as np
from numpy.lib.stride_tricks import as_strided

from ..errors import DimensionError
from .core import as_tensor, record

def _norm_axis(axis, ndim, tag):
  if axis < -ndim or axis >= ndim:
    raise DimensionError(f'{tag}: axis {axis} out of range for a {ndim}-d tensor', axis=axis)
  return axis % ndim

def _broadcast_shape(a, b, tag):
  try:
    return np.broadcast_shapes(a.shape, b.shape)
  except ValueError:
    ndim = max(a.ndim, b.ndim)
    sa = (1,) * (ndim - a.ndim) + a.shape
    sb = (1,) * (ndim - b.ndim) + b.shape
    for axis, (x, y) in enumerate(zip(sa, sb)):
      if x != y and x != 1 and y != 1:
        raise DimensionError(f'{tag}: shapes {a.shape} and {b.shape} differ on axis {axis}', axis=axis)
    raise

def unbroadcast(grad, shape):
  while grad.ndim > len(shape):
    grad = grad.sum(axis=0)
  for axis, size in enumerate(shape):
    if size == 1 and grad.shape[axis] != 1:
      grad = grad.sum(axis=axis, keepdims=True)
  return grad

#################
# Elementwise   #
#################

def add(a, b):
  a, b = as_tensor(a), as_tensor(b)
  _broadcast_shape(a, b, 'add')
  def backward(g):
    return unbroadcast(g, a.shape), unbroadcast(g, b.shape)
  return record('add', (a, b), a.data + b.data, backward)

def sub(a, b):
  a, b = as_tensor(a), as_tensor(b)
  _broadcast_shape(a, b, 'sub')
  def backward(g):
    return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)
  return record('sub', (a, b), a.data - b.data, backward)

def mul(a, b):
  a, b = as_tensor(a), as_tensor(b)
  _broadcast_shape(a, b, 'mul')
  def backward(g):
    return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)
  return record('mul', (a, b), a.data * b.data, backward)

def div(a, b):
  a, b = as_tensor(a), as_tensor(b)
  _broadcast_shape(a, b, 'div')
  def backward(g):
    ga = unbroadcast(g / b.data, a.shape)
    gb = unbroadcast(-g * a.data / (b.data * b.data), b.shape)
    return ga, gb
  return record('div', (a, b), a.data / b.data, backward)

def scale(x, c):
  x = as_tensor(x)
  c = float(c)
  return record('scale', (x,), x.data * c, lambda g: (g * c,))

def relu(x):
  x = as_tensor(x)
  mask = x.data > 0
  return record('relu', (x,), np.where(mask, x.data, 0.0), lambda g: (g * mask,))

def leaky_relu(x, slope=0.2):
  x = as_tensor(x)
  factor = np.where(x.data > 0, 1.0, slope)
  return record('leaky_relu', (x,), x.data * factor, lambda g: (g * factor,))

def sigmoid(x):
  x = as_tensor(x)
  z = np.exp(-np.abs(x.data))
  out = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
  return record('sigmoid', (x,), out, lambda g: (g * out * (1.0 - out),))

def tanh(x):
  x = as_tensor(x)
  out = np.tanh(x.data)
  return record('tanh', (x,), out, lambda g: (g * (1.0 - out * out),))

def exp(x):
  x = as_tensor(x)
  out = np.exp(x.data)
  return record('exp', (x,), out, lambda g: (g * out,))

def log(x):
  x = as_tensor(x)
  return record('log', (x,), np.log(x.data), lambda g: (g / x.data,))

def sqrt(x):
  x = as_tensor(x)
  out = np.sqrt(x.data)
  return record('sqrt', (x,), out, lambda g: (g * 0.5 / out,))

def abs(x):
  x = as_tensor(x)
  sign = np.sign(x.data)
  return record('abs', (x,), np.abs(x.data), lambda g: (g * sign,))

def clip(x, lo, hi):
  x = as_tensor(x)
  inside = (x.data >= lo) & (x.data <= hi)
  return record('clip', (x,), np.clip(x.data, lo, hi), lambda g: (g * inside,))

def detach(x):
  return as_tensor(x).detach()

def straight_through(hard, soft):
  """Forward value of `hard`, gradient of `soft`."""
  hard, soft = as_tensor(hard), as_tensor(soft)
  if hard.shape != soft.shape:
    raise DimensionError(f'straight_through: shapes {hard.shape} and {soft.shape} differ')
  return record('straight_through', (soft,), hard.data.copy(), lambda g: (g,))

#################
# Reductions    #
#################

def _expand(g, shape, axis, keepdims):
  if axis is None:
    return np.broadcast_to(g, shape).copy()
  axes = tuple(sorted(a % len(shape) for a in np.atleast_1d(axis)))
  if not keepdims:
    g = np.expand_dims(g, axes)
  return np.broadcast_to(g, shape).copy()

def _check_axes(axis, ndim, tag):
  if axis is None:
    return None
  if isinstance(axis, (tuple, list)):
    return tuple(_norm_axis(a, ndim, tag) for a in axis)
  return _norm_axis(axis, ndim, tag)

def sum(x, axis=None, keepdims=False):
  x = as_tensor(x)
  axis = _check_axes(axis, x.ndim, 'sum')
  out = x.data.sum(axis=axis, keepdims=keepdims)
  return record('sum', (x,), out, lambda g: (_expand(g, x.shape, axis, keepdims),))

def mean(x, axis=None, keepdims=False):
  x = as_tensor(x)
  axis = _check_axes(axis, x.ndim, 'mean')
  out = x.data.mean(axis=axis, keepdims=keepdims)
  count = x.data.size / max(out.size, 1) if x.data.size else 1
  return record('mean', (x,), out, lambda g: (_expand(g, x.shape, axis, keepdims) / count,))

def l1_norm(x):
  return sum(abs(x))

def softmax(x, axis=-1):
  x = as_tensor(x)
  axis = _norm_axis(axis, x.ndim, 'softmax')
  shifted = x.data - x.data.max(axis=axis, keepdims=True)
  e = np.exp(shifted)
  out = e / e.sum(axis=axis, keepdims=True)
  def backward(g):
    return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)
  return record('softmax', (x,), out, backward)

def l2_normalize(x, axis):
  """x / ‖x‖ along `axis`; zero vectors map to zero with zero gradient."""
  x = as_tensor(x)
  axis = _norm_axis(axis, x.ndim, 'l2_normalize')
  norm = np.sqrt((x.data * x.data).sum(axis=axis, keepdims=True))
  safe = np.where(norm > 0, norm, 1.0)
  unit = np.where(norm > 0, x.data / safe, 0.0)
  def backward(g):
    projected = g - unit * (g * unit).sum(axis=axis, keepdims=True)
    return (np.where(norm > 0, projected / safe, 0.0),)
  return record('l2_normalize', (x,), unit, backward)

#################
# Shape         #
#################

def matmul(a, b):
  a, b = as_tensor(a), as_tensor(b)
  if a.ndim < 2 or b.ndim < 2:
    raise DimensionError(f'matmul: needs 2-d or batched operands, got {a.shape} and {b.shape}')
  if a.shape[-1] != b.shape[-2]:
    raise DimensionError(f'matmul: inner axis mismatch {a.shape[-1]} vs {b.shape[-2]}', axis=-1)
  def backward(g):
    ga = unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
    gb = unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
    return ga, gb
  return record('matmul', (a, b), np.matmul(a.data, b.data), backward)

def reshape(x, shape):
  x = as_tensor(x)
  try:
    out = x.data.reshape(shape)
  except ValueError:
    raise DimensionError(f'reshape: cannot view {x.shape} as {shape}')
  return record('reshape', (x,), out, lambda g: (g.reshape(x.shape),))

def transpose(x, axes=None):
  x = as_tensor(x)
  if axes is None:
    axes = tuple(reversed(range(x.ndim)))
  axes = tuple(_norm_axis(a, x.ndim, 'transpose') for a in axes)
  if sorted(axes) != list(range(x.ndim)):
    raise DimensionError(f'transpose: {axes} is not a permutation of {x.ndim} axes')
  inverse = tuple(np.argsort(axes))
  return record('transpose', (x,), x.data.transpose(axes), lambda g: (g.transpose(inverse),))

def concat(tensors, axis=0):
  tensors = [ as_tensor(t) for t in tensors ]
  axis = _norm_axis(axis, tensors[0].ndim, 'concat')
  for t in tensors[1:]:
    if t.ndim != tensors[0].ndim:
      raise DimensionError(f'concat: rank {t.ndim} vs {tensors[0].ndim}')
    for a in range(t.ndim):
      if a != axis and t.shape[a] != tensors[0].shape[a]:
        raise DimensionError(f'concat: shapes {tensors[0].shape} and {t.shape} differ on axis {a}', axis=a)
  sizes = [ t.shape[axis] for t in tensors ]
  splits = np.cumsum(sizes)[:-1]
  def backward(g):
    return tuple(np.split(g, splits, axis=axis))
  return record('concat', tuple(tensors), np.concatenate([ t.data for t in tensors ], axis=axis), backward)

def getitem(x, key):
  x = as_tensor(x)
  def backward(g):
    full = np.zeros_like(x.data)
    np.add.at(full, key, g)
    return (full,)
  return record('getitem', (x,), x.data[key], backward)

def pad2d(x, padding):
  """Zero-pads the last two axes by `padding` on every side."""
  x = as_tensor(x)
  p = int(padding)
  widths = [ (0, 0) ] * (x.ndim - 2) + [ (p, p), (p, p) ]
  h, w = x.shape[-2:]
  return record('pad2d', (x,), np.pad(x.data, widths), lambda g: (g[..., p:p + h, p:p + w],))

#################
# Convolution   #
#################

def _windows(xp, kh, kw, stride, dilation, oh, ow):
  n, c = xp.shape[:2]
  sn, sc, sh, sw = xp.strides
  return as_strided(
    xp,
    shape=(n, c, kh, kw, oh, ow),
    strides=(sn, sc, sh * dilation, sw * dilation, sh * stride, sw * stride),
    writeable=False,
  )

def conv_output_size(size, kernel, stride, padding, dilation=1):
  return (size + 2 * padding - dilation * (kernel - 1) - 1) // stride + 1

def conv2d(x, weight, bias=None, stride=1, padding=0, dilation=1):
  """Cross-correlation of NCHW input with OIkHkW weight, zero padding."""
  x, weight = as_tensor(x), as_tensor(weight)
  if x.ndim != 4:
    raise DimensionError(f'conv2d: input must be NCHW, got rank {x.ndim}', axis=0)
  if weight.ndim != 4:
    raise DimensionError(f'conv2d: weight must be OCkHkW, got rank {weight.ndim}', axis=0)
  if x.shape[1] != weight.shape[1]:
    raise DimensionError(f'conv2d: input has {x.shape[1]} channels, weight expects {weight.shape[1]}', axis=1)
  if stride < 1 or dilation < 1 or padding < 0:
    raise DimensionError(f'conv2d: invalid stride={stride} padding={padding} dilation={dilation}')

  n, c, h, w = x.shape
  o, _, kh, kw = weight.shape
  s, p, d = stride, padding, dilation
  oh = conv_output_size(h, kh, s, p, d)
  ow = conv_output_size(w, kw, s, p, d)
  if oh < 1:
    raise DimensionError(f'conv2d: output height {oh} from input height {h}', axis=2)
  if ow < 1:
    raise DimensionError(f'conv2d: output width {ow} from input width {w}', axis=3)
  if bias is not None:
    bias = as_tensor(bias)
    if bias.shape != (o,):
      raise DimensionError(f'conv2d: bias shape {bias.shape}, expected ({o},)', axis=0)

  xp = np.pad(x.data, ((0, 0), (0, 0), (p, p), (p, p)))
  cols = _windows(xp, kh, kw, s, d, oh, ow)
  out = np.tensordot(cols, weight.data, axes=([1, 2, 3], [1, 2, 3])).transpose(0, 3, 1, 2)
  if bias is not None:
    out = out + bias.data[None, :, None, None]

  def backward(g):
    gw = np.tensordot(g, cols, axes=([0, 2, 3], [0, 4, 5]))
    gcols = np.tensordot(g, weight.data, axes=([1], [0]))
    gxp = np.zeros_like(xp)
    for i in range(kh):
      for j in range(kw):
        gxp[:, :, i * d:i * d + s * (oh - 1) + 1:s, j * d:j * d + s * (ow - 1) + 1:s] += \
          gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    gx = gxp[:, :, p:p + h, p:p + w]
    if bias is None:
      return gx, gw
    return gx, gw, g.sum(axis=(0, 2, 3))

  inputs = (x, weight) if bias is None else (x, weight, bias)
  return record('conv2d', inputs, np.ascontiguousarray(out), backward)

def deconv2d(x, weight, bias=None, stride=1, padding=0):
  """Transposed convolution; weight is (C_in, C_out, kH, kW)."""
  x, weight = as_tensor(x), as_tensor(weight)
  if x.ndim != 4:
    raise DimensionError(f'deconv2d: input must be NCHW, got rank {x.ndim}', axis=0)
  if weight.ndim != 4:
    raise DimensionError(f'deconv2d: weight must be (C_in, C_out, kH, kW), got rank {weight.ndim}', axis=0)
  if x.shape[1] != weight.shape[0]:
    raise DimensionError(f'deconv2d: input has {x.shape[1]} channels, weight expects {weight.shape[0]}', axis=1)
  if stride < 1 or padding < 0:
    raise DimensionError(f'deconv2d: invalid stride={stride} padding={padding}')

  n, c, h, w = x.shape
  _, o, kh, kw = weight.shape
  s, p = stride, padding
  fh, fw = (h - 1) * s + kh, (w - 1) * s + kw
  oh, ow = fh - 2 * p, fw - 2 * p
  if oh < 1:
    raise DimensionError(f'deconv2d: output height {oh} from input height {h}', axis=2)
  if ow < 1:
    raise DimensionError(f'deconv2d: output width {ow} from input width {w}', axis=3)
  if bias is not None:
    bias = as_tensor(bias)
    if bias.shape != (o,):
      raise DimensionError(f'deconv2d: bias shape {bias.shape}, expected ({o},)', axis=0)

  cols = np.tensordot(x.data, weight.data, axes=([1], [0]))
  full = np.zeros((n, o, fh, fw))
  for i in range(kh):
    for j in range(kw):
      full[:, :, i:i + s * (h - 1) + 1:s, j:j + s * (w - 1) + 1:s] += cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
  out = full[:, :, p:p + oh, p:p + ow]
  if bias is not None:
    out = out + bias.data[None, :, None, None]

  def backward(g):
    gfull = np.zeros((n, o, fh, fw))
    gfull[:, :, p:p + oh, p:p + ow] = g
    gcols = np.empty((n, h, w, o, kh, kw))
    for i in range(kh):
      for j in range(kw):
        gcols[:, :, :, :, i, j] = gfull[:, :, i:i + s * (h - 1) + 1:s, j:j + s * (w - 1) + 1:s].transpose(0, 2, 3, 1)
    gx = np.tensordot(gcols, weight.data, axes=([3, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    gw = np.tensordot(x.data, gcols, axes=([0, 2, 3], [0, 1, 2]))
    if bias is None:
      return gx, gw
    return gx, gw, g.sum(axis=(0, 2, 3))

  inputs = (x, weight) if bias is None else (x, weight, bias)
  return record('deconv2d', inputs, np.ascontiguousarray(out), backward)

def interpolation_matrix(size, factor):
  """Half-pixel-centered linear interpolation from `size` to `size * factor` samples."""
  out_size = size * factor
  matrix = np.zeros((out_size, size))
  for i in range(out_size):
    src = min(max((i + 0.5) / factor - 0.5, 0.0), size - 1)
    i0 = int(math.floor(src))
    i1 = min(i0 + 1, size - 1)
    t = src - i0
    matrix[i, i0] += 1.0 - t
    matrix[i, i1] += t
  return matrix

def bilinear_upsample(x, factor=2):
  """Upsamples the last two axes by an integer factor. Rows of the kernel sum to 1."""
  x = as_tensor(x)
  if x.ndim < 2:
    raise DimensionError(f'bilinear_upsample: needs at least 2 axes, got {x.ndim}')
  if factor < 1 or int(factor) != factor:
    raise DimensionError(f'bilinear_upsample: factor must be a positive integer, got {factor}')
  mh = interpolation_matrix(x.shape[-2], int(factor))
  mw = interpolation_matrix(x.shape[-1], int(factor))
  out = np.einsum('ih,...hw,jw->...ij', mh, x.data, mw)
  return record('bilinear_upsample', (x,), out, lambda g: (np.einsum('ih,...ij,jw->...hw', mh, g, mw),))

def avg_pool(x, size):
  """Non-overlapping `size`×`size` average pooling over the last two axes."""
  x = as_tensor(x)
  h, w = x.shape[-2:]
  if h % size or w % size:
    raise DimensionError(f'avg_pool: {h}x{w} is not divisible by {size}', axis=x.ndim - 2)
  lead = x.shape[:-2]
  blocks = reshape(x, lead + (h // size, size, w // size, size))
  k = len(lead)
  return mean(blocks, axis=(k + 1, k + 3))
