from collections import OrderedDict

import numpy as np

from ..errors import ContractError, DimensionError
from ..utils import make_rng
from . import ops
from .core import Tensor

def kaiming_uniform(rng, shape, fan_in):
  bound = np.sqrt(6.0 / max(fan_in, 1))
  return rng.uniform(-bound, bound, size=shape)

initializers = {
  'kaiming': lambda rng, shape, fan_in: kaiming_uniform(rng, shape, fan_in),
  'zeros': lambda rng, shape, fan_in: np.zeros(shape),
  'ones': lambda rng, shape, fan_in: np.ones(shape),
  'normal': lambda rng, shape, fan_in: rng.standard_normal(shape),
}

class ParamStore:
  """
  Ordered map from hierarchical names ("encoder.conv0.weight") to Tensors.
  Holds trainable parameters plus non-trainable buffers such as optimizer
  moments and power-iteration vectors, so one checkpoint captures all of it.

  Initialization draws from a generator keyed by (seed, name), which makes a
  parameter's initial value independent of construction order.
  """

  def __init__(self, seed=0):
    self.seed = seed
    self.tensors = OrderedDict()
    self.trainable = set()
    self.frozen = False

  def __getitem__(self, name):
    return self.tensors[name]

  def __contains__(self, name):
    return name in self.tensors

  def __len__(self):
    return len(self.tensors)

  def __iter__(self):
    return iter(self.tensors)

  def names(self):
    return list(self.tensors.keys())

  def items(self):
    return list(self.tensors.items())

  def param(self, name, shape, init='kaiming', fan_in=None):
    shape = tuple(int(s) for s in shape)
    if name in self.tensors:
      tensor = self.tensors[name]
      if tensor.shape != shape:
        raise DimensionError(f'Parameter "{name}" has shape {tensor.shape}, requested {shape}')
      return tensor
    if self.frozen:
      raise ContractError(f'Frozen store has no parameter "{name}"')

    fan_in = fan_in if fan_in is not None else int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
    rng = make_rng(self.seed, name)
    data = initializers[init](rng, shape, fan_in)
    tensor = Tensor(data, requires_grad=True, name=name)
    self.tensors[name] = tensor
    self.trainable.add(name)
    return tensor

  def buffer(self, name, data=None, shape=None):
    if name in self.tensors:
      return self.tensors[name]
    if self.frozen:
      raise ContractError(f'Frozen store has no buffer "{name}"')
    if data is None:
      data = np.zeros(shape)
    tensor = Tensor(data, requires_grad=False, name=name)
    self.tensors[name] = tensor
    return tensor

  def parameters(self):
    return [ (name, t) for name, t in self.tensors.items() if name in self.trainable ]

  def zero_grad(self):
    for _, tensor in self.parameters():
      tensor.grad = None

  def grads(self):
    return { name: t.grad for name, t in self.parameters() if t.grad is not None }

  def state_dict(self):
    return OrderedDict((name, t.data) for name, t in self.tensors.items())

  def load_state(self, state, strict=False):
    """Copies arrays into existing entries; unknown names become buffers."""
    for name, data in state.items():
      data = np.asarray(data, dtype=np.float64)
      if name in self.tensors:
        if self.tensors[name].shape != data.shape:
          raise DimensionError(f'"{name}": stored shape {data.shape}, model shape {self.tensors[name].shape}')
        self.tensors[name].data = data.copy()
      elif strict:
        raise ContractError(f'Unexpected tensor "{name}" in state')
      else:
        self.buffer(name, data.copy())
    return self

  def snapshot(self):
    """Read-only copy for inference; safe to share across threads."""
    store = ParamStore(self.seed)
    for name, tensor in self.tensors.items():
      copy = Tensor(tensor.data, requires_grad=False, name=name)
      copy.data.flags.writeable = False
      store.tensors[name] = copy
    store.frozen = True
    return store

  def num_parameters(self):
    return int(sum(t.size for _, t in self.parameters()))

class Conv2d:

  def __init__(self, store, name, in_channels, out_channels, kernel=3, stride=1, padding=None,
               dilation=1, bias=True, init='kaiming'):
    self.store = store
    self.name = name
    self.stride = stride
    self.dilation = dilation
    self.padding = padding if padding is not None else dilation * (kernel - 1) // 2
    fan_in = in_channels * kernel * kernel
    store.param(f'{name}.weight', (out_channels, in_channels, kernel, kernel), init=init, fan_in=fan_in)
    self.has_bias = bias
    if bias:
      store.param(f'{name}.bias', (out_channels,), init='zeros')

  @property
  def weight(self):
    return self.store[f'{self.name}.weight']

  @property
  def bias(self):
    return self.store[f'{self.name}.bias'] if self.has_bias else None

  def __call__(self, x, weight=None):
    return ops.conv2d(
      x,
      weight if weight is not None else self.weight,
      self.bias,
      stride=self.stride,
      padding=self.padding,
      dilation=self.dilation,
    )

class Deconv2d:

  def __init__(self, store, name, in_channels, out_channels, kernel=4, stride=2, padding=1,
               bias=True, init='kaiming'):
    self.store = store
    self.name = name
    self.stride = stride
    self.padding = padding
    store.param(f'{name}.weight', (in_channels, out_channels, kernel, kernel), init=init,
                fan_in=out_channels * kernel * kernel)
    self.has_bias = bias
    if bias:
      store.param(f'{name}.bias', (out_channels,), init='zeros')

  @property
  def weight(self):
    return self.store[f'{self.name}.weight']

  def __call__(self, x):
    bias = self.store[f'{self.name}.bias'] if self.has_bias else None
    return ops.deconv2d(x, self.weight, bias, stride=self.stride, padding=self.padding)

class Linear:
  """y = x @ W + b over the last axis."""

  def __init__(self, store, name, in_features, out_features, bias=True, init='kaiming'):
    self.store = store
    self.name = name
    store.param(f'{name}.weight', (in_features, out_features), init=init, fan_in=in_features)
    self.has_bias = bias
    if bias:
      store.param(f'{name}.bias', (out_features,), init='zeros')

  def __call__(self, x):
    y = ops.matmul(x, self.store[f'{self.name}.weight'])
    if self.has_bias:
      y = ops.add(y, self.store[f'{self.name}.bias'])
    return y
