from .core import Tensor, Graph, backward, no_grad, as_tensor, current_graph
from .nn import ParamStore, Conv2d, Deconv2d, Linear, kaiming_uniform
from .optim import adam_step, Adam
from .gradcheck import check_gradients, numerical_gradient, relative_error
from . import ops
