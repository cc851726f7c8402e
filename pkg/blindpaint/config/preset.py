import yaml
from ..errors import ContractError
from ..utils import DotDict

PRESET_FOLDERS = ( 'builtin_presets', 'presets' )

class Preset:
  """
  Named bundle of settings stored as YAML. Builtin presets ship in
  `builtin/presets`; user presets live in `<config>/presets` and shadow nothing.
  """

  extensions = ( '.yaml', '.yml' )

  def __init__(self, name=None, folders=None):
    self.name = name or ''
    self.folders = folders
    self.path = None

    settings = self.load()

    if settings is None:
      self.settings = DotDict({})
      self.empty = True
    else:
      self.settings = DotDict(settings)
      self.empty = False

  def load(self):
    if not self.name or not self.folders:
      return None

    self.path = self.folders.find(PRESET_FOLDERS, self.name, self.extensions)
    if self.path is None:
      return None

    with open(self.path, 'r') as f:
      settings = yaml.safe_load(f) or {}
    if not isinstance(settings, dict):
      raise ContractError(f'Preset {self.path} must be a mapping of settings')
    return settings

def list_presets(folders):
  return folders.stems(PRESET_FOLDERS, Preset.extensions)
