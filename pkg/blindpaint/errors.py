class BlindpaintError(Exception):
  pass

class DimensionError(BlindpaintError):

  def __init__(self, message, axis=None):
    super().__init__(message)
    self.axis = axis

class ContractError(BlindpaintError):
  pass

class ParseError(BlindpaintError):

  def __init__(self, message, offset):
    super().__init__(f'{message} (at byte {offset})')
    self.offset = offset

class UnsupportedFormatError(BlindpaintError):
  pass

class ProtocolError(BlindpaintError):
  pass

class CheckpointError(BlindpaintError):
  pass

class NonFiniteLossError(BlindpaintError):

  def __init__(self, step, checkpoint_path=None):
    self.step = step
    self.checkpoint_path = checkpoint_path
    message = f'Non-finite loss at step {step}'
    if checkpoint_path:
      message += f'; last good checkpoint: {checkpoint_path}'
    super().__init__(message)
