from ..adversary import DiscriminatorConfig
from ..config import Config, unknown_keys
from ..inpaint import GeneratorConfig
from ..losses import ExtractorConfig, LossWeights
from ..maskdetect import DetectorConfig
from ..utils import DotDict, printer
from .train import TrainConfig

CONFIG_CLASSES = {
  'detector': DetectorConfig,
  'generator': GeneratorConfig,
  'discriminator': DiscriminatorConfig,
  'losses': LossWeights,
  'extractor': ExtractorConfig,
  'train': TrainConfig,
}

def build_configs(settings, warn=True):
  """Splits one flat settings map into the typed config of every component."""
  if warn:
    for key in unknown_keys(settings, *CONFIG_CLASSES.values()):
      printer.warn(f'Ignoring unknown setting "{key}"')
  return DotDict({ name: cls.from_settings(settings) for name, cls in CONFIG_CLASSES.items() })

def resolve_configs(preset=None, config_file=None, overrides=None, config=None):
  config = config or Config()
  return build_configs(config.resolve(preset, config_file, overrides))
