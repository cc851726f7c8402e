from dataclasses import fields

class FromSettings:
  """Mixin for config dataclasses read out of a flat settings map."""

  @classmethod
  def field_names(cls):
    return { f.name for f in fields(cls) }

  @classmethod
  def from_settings(cls, settings=None, **overrides):
    values = {}
    for key, value in list((settings or {}).items()) + list(overrides.items()):
      if key in cls.field_names() and value is not None:
        values[key] = tuple(value) if isinstance(value, list) else value
    return cls(**values)

def unknown_keys(settings, *config_classes):
  known = set()
  for cls in config_classes:
    known |= cls.field_names()
  return sorted(key for key in settings if key not in known)
