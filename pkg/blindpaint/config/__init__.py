from .config import Config, parse_config_text
from .folders import Folders
from .preset import Preset, list_presets
from .schema import FromSettings, unknown_keys
