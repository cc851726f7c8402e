from dataclasses import dataclass

from ..config import Config, FromSettings
from ..errors import ContractError

LOSS_TERMS = ( 'recons', 'adv', 'perc', 'style', 'tv' )

@dataclass
class LossWeights(FromSettings):
  lambda_recons: float = 1.0
  lambda_adv: float = 0.01
  lambda_perc: float = 0.1
  lambda_style: float = 250.0
  lambda_tv: float = 0.1

  def __post_init__(self):
    for term, weight in self.items():
      if weight < 0:
        raise ContractError(f'lambda_{term} must be >= 0, got {weight}')

  def items(self):
    return [ (term, float(getattr(self, f'lambda_{term}'))) for term in LOSS_TERMS ]

  @classmethod
  def preset(cls, name, config=None):
    config = config or Config()
    return cls.from_settings(config.load_preset(name).settings)
