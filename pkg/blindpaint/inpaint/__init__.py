from .landmarks import (
  LandmarkMap, LandmarkProvider, TemplateLandmarks, FileLandmarks,
  register_provider, get_provider, list_providers, render_heatmaps, mean_face, parse_landmarks, landmark_batch,
  NUM_LANDMARKS,
)
from .blocks import FeaturePyramid, ResidualBlock, LongShortAttention, GeneratorEncoder, long_short_attention, DILATIONS
from .region_norm import RegionNorm, region_standardize, region_normalize, RN_EPS
from .tdrb import TDRB, mask_fuse, tdrb, FUSIONS
from .generator import Generator, GeneratorConfig, GeneratorOutput, mask_pyramid, composite, encode, generate
