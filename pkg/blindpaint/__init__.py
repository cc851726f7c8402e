"""Blind face inpainting: frequency-guided mask detection and top-down refinement"""
__version__ = '0.1.0'

from .config import Config
from .errors import BlindpaintError
