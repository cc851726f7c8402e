import os, yaml

from ..errors import ContractError
from ..utils import DotDict, default
from .folders import Folders
from .preset import Preset

def _scalar(value):
  """YAML 1.1 reads `1e-4` as a string; exponent floats are accepted here too."""
  if not value:
    return ''
  parsed = yaml.safe_load(value)
  if isinstance(parsed, str):
    try:
      return float(parsed)
    except ValueError:
      pass
  return parsed

def parse_config_text(text, source='<config>'):
  """
  Parses `key = value` lines. `#` starts a comment. Values are typed with
  YAML scalar rules, so `1e-4` is a float and `true` a bool.
  """
  settings = {}
  for line_number, raw_line in enumerate(text.split('\n'), start=1):
    line = raw_line.split('#', 1)[0].strip()
    if not line:
      continue
    if '=' not in line:
      raise ContractError(f'{source}:{line_number}: expected "key = value", got "{raw_line.strip()}"')
    key, value = [ part.strip() for part in line.split('=', 1) ]
    if not key:
      raise ContractError(f'{source}:{line_number}: empty key')
    settings[key] = _scalar(value)
  return settings

class Config:

  default_config_path = '~/.config/blindpaint'

  def __init__(self, config_path=None):
    self.config_path = config_path or os.getenv('BLINDPAINT_CONFIG_PATH', self.default_config_path)
    self.folders = Folders(self.config_path)
    self.folders.add('presets')

  def load_preset(self, preset_name):
    preset = Preset(preset_name, self.folders)
    if preset_name and preset.empty:
      raise ContractError(f'Unknown preset "{preset_name}"')
    return preset

  def resolve(self, preset=None, config_file=None, overrides=None):
    """Preset, then config file, then explicit overrides (None values skipped)."""
    settings = DotDict({})

    if preset:
      settings.update(self.load_preset(preset).settings)

    if config_file:
      with open(config_file, 'r', encoding='utf-8') as f:
        settings.update(parse_config_text(f.read(), source=config_file))

    for key, value in default(overrides, {}).items():
      if value is not None:
        settings[key] = value

    return settings
