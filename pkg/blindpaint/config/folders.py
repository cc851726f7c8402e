import os
from ..utils import expand_path, default

BUILTIN_PATH = expand_path(__file__, '..', '..', 'builtin')

class Folders:
  """
  Named directories under the config root. Searches go through several
  folders in order, so builtin files are found before user files.
  """

  def __init__(self, config_path=None):
    self.config_path = expand_path(config_path)
    self.folders = {}

    self.add('config', self.config_path)
    self.add('builtin_presets', expand_path(BUILTIN_PATH, 'presets'))

  def add(self, folder_name, folder_path=None):
    self.folders[folder_name] = default(folder_path, expand_path(self.config_path, folder_name))
    return self.folders[folder_name]

  def get_path(self, folder_name):
    return self.folders.get(folder_name)

  def find(self, folder_names, stem, extensions):
    """First `<folder>/<stem><ext>` that exists, or None."""
    for folder_name in folder_names:
      folder_path = self.get_path(folder_name)
      if not folder_path:
        continue
      for ext in extensions:
        file_path = expand_path(folder_path, stem + ext)
        if os.path.isfile(file_path):
          return file_path
    return None

  def stems(self, folder_names, extensions):
    names = set()
    for folder_name in folder_names:
      folder_path = self.get_path(folder_name)
      if not folder_path or not os.path.isdir(folder_path):
        continue
      for file_name in os.listdir(folder_path):
        stem, ext = os.path.splitext(file_name)
        if ext in extensions:
          names.add(stem)
    return sorted(names)
