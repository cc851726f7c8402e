import threading
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from ..errors import ContractError, DimensionError

class Tensor:
  """
  Dense float64 array with an optional gradient slot. Tensors produced by a
  recorded operation carry the index of their node in the Graph that made them.
  """

  __array_priority__ = 100

  def __init__(self, data, requires_grad=False, name=''):
    self.data = np.array(data, dtype=np.float64)
    self.requires_grad = requires_grad
    self.grad = None
    self.name = name
    self.graph = None
    self.node = None

  @property
  def shape(self):
    return self.data.shape

  @property
  def ndim(self):
    return self.data.ndim

  @property
  def size(self):
    return self.data.size

  def item(self):
    if self.data.size != 1:
      raise ContractError(f'item() needs a single-element tensor, got shape {self.shape}')
    return float(self.data.reshape(-1)[0])

  def zero_grad(self):
    self.grad = None

  def detach(self):
    return Tensor(self.data, requires_grad=False, name=self.name)

  def __repr__(self):
    grad = ', requires_grad=True' if self.requires_grad else ''
    return f'Tensor(shape={self.shape}{grad})'

  def __len__(self):
    return self.shape[0]

  # Operator sugar; the implementations live in ops.py
  def __add__(self, other): return _ops().add(self, other)
  def __radd__(self, other): return _ops().add(other, self)
  def __sub__(self, other): return _ops().sub(self, other)
  def __rsub__(self, other): return _ops().sub(other, self)
  def __mul__(self, other): return _ops().mul(self, other)
  def __rmul__(self, other): return _ops().mul(other, self)
  def __truediv__(self, other): return _ops().div(self, other)
  def __rtruediv__(self, other): return _ops().div(other, self)
  def __neg__(self): return _ops().scale(self, -1.0)
  def __matmul__(self, other): return _ops().matmul(self, other)
  def __getitem__(self, key): return _ops().getitem(self, key)

def _ops():
  from . import ops
  return ops

def as_tensor(x):
  return x if isinstance(x, Tensor) else Tensor(x)

@dataclass
class Node:
  tag: str
  inputs: Tuple[Tensor, ...]
  output: Tensor
  backward: Callable

class Graph:
  """
  Append-only tape. Backward walks nodes in strict reverse append order and
  sums gradients over every consumer of a tensor. Confined to one thread.
  """

  def __init__(self):
    self.nodes = []

  def __enter__(self):
    _stack().append(self)
    return self

  def __exit__(self, *args):
    _stack().pop()
    self.clear()

  def __len__(self):
    return len(self.nodes)

  def clear(self):
    for node in self.nodes:
      node.output.graph = None
      node.output.node = None
    self.nodes = []

  def record(self, tag, inputs, output, backward):
    output.graph = self
    output.node = len(self.nodes)
    output.requires_grad = True
    self.nodes.append(Node(tag, tuple(inputs), output, backward))
    return output

  def backward(self, loss):
    if loss.data.size != 1:
      raise ContractError(f'backward() needs a scalar loss, got shape {loss.shape}')
    if loss.node is None or loss.graph is not self:
      raise ContractError('backward() needs a loss produced by recorded operations on this graph')

    grads = { id(loss): np.ones_like(loss.data) }
    for index in range(loss.node, -1, -1):
      node = self.nodes[index]
      grad = grads.pop(id(node.output), None)
      if grad is None:
        continue
      input_grads = node.backward(grad)
      for tensor, input_grad in zip(node.inputs, input_grads):
        if input_grad is None or not tensor.requires_grad:
          continue
        if input_grad.shape != tensor.shape:
          raise DimensionError(
            f'{node.tag}: gradient shape {input_grad.shape} does not match input shape {tensor.shape}'
          )
        if tensor.node is None:
          tensor.grad = input_grad.copy() if tensor.grad is None else tensor.grad + input_grad
        elif id(tensor) in grads:
          grads[id(tensor)] = grads[id(tensor)] + input_grad
        else:
          grads[id(tensor)] = input_grad

class _GraphState(threading.local):

  def __init__(self):
    self.stack = []
    self.enabled = True

_state = _GraphState()

def _stack():
  return _state.stack

def current_graph():
  """The innermost active Graph, or None outside any `with Graph()`."""
  return _state.stack[-1] if _state.stack else None

def grad_enabled():
  return _state.enabled

class no_grad:

  def __enter__(self):
    self.previous = _state.enabled
    _state.enabled = False

  def __exit__(self, *args):
    _state.enabled = self.previous

def record(tag, inputs, output_data, backward):
  """
  Wraps `output_data` in a Tensor and records it on the active Graph when any
  input needs a gradient. Outside `with Graph()` nothing is kept.
  """
  output = Tensor(output_data)
  graph = current_graph()
  if graph is not None and grad_enabled() and any(t.requires_grad for t in inputs):
    graph.record(tag, inputs, output, backward)
  return output

def backward(loss):
  if loss.graph is None:
    raise ContractError('backward() needs a loss produced by recorded operations')
  loss.graph.backward(loss)
