from .extractor import FeatureExtractor, ExtractorConfig
from .objectives import reconstruction_loss, perceptual_loss, style_loss, tv_loss, total_loss, gram
from .weights import LossWeights, LOSS_TERMS
