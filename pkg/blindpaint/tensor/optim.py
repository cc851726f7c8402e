import numpy as np

from ..errors import ContractError, DimensionError

def moment_names(name):
  return f'{name}@adam.m', f'{name}@adam.v'

def adam_step(store, grads, lr, beta1=0.0, beta2=0.9, eps=1e-8, t=1):
  """
  One bias-corrected Adam update of every parameter named in `grads`.
  Moments live in `store` as buffers next to their parameter.
  """
  if t < 1:
    raise ContractError(f'Adam step index must be >= 1, got {t}')

  for name, grad in grads.items():
    param = store[name]
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != param.shape:
      raise DimensionError(f'Gradient for "{name}" has shape {grad.shape}, parameter {param.shape}')

    m_name, v_name = moment_names(name)
    m = store.buffer(m_name, shape=param.shape)
    v = store.buffer(v_name, shape=param.shape)

    m.data = beta1 * m.data + (1.0 - beta1) * grad
    v.data = beta2 * v.data + (1.0 - beta2) * grad * grad
    m_hat = m.data / (1.0 - beta1 ** t)
    v_hat = v.data / (1.0 - beta2 ** t)
    param.data = param.data - lr * m_hat / (np.sqrt(v_hat) + eps)

  return store

STEP_NAME = '@adam.t'

class Adam:
  """Adam bound to one store; the step count is a store buffer so it survives checkpoints."""

  def __init__(self, store, lr=1e-4, beta1=0.0, beta2=0.9, eps=1e-8):
    self.store = store
    self.lr = lr
    self.beta1 = beta1
    self.beta2 = beta2
    self.eps = eps
    store.buffer(STEP_NAME, np.zeros(()))

  @property
  def t(self):
    return int(self.store[STEP_NAME].item())

  def step(self):
    self.store[STEP_NAME].data = np.array(float(self.t + 1))
    adam_step(self.store, self.store.grads(), self.lr, self.beta1, self.beta2, self.eps, self.t)
    self.store.zero_grad()

  def zero_grad(self):
    self.store.zero_grad()
