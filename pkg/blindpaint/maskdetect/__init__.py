from .embed import PatchSequence, PatchEmbedding, patch_embed, sinusoidal_encoding, to_patches, from_patches, FEATURE_STRIDE
from .attention import attention_weights, self_attention, dual_attention, split_heads, merge_heads
from .frequency_attention import FrequencyAttention, frequency_attention
from .encoder import EncoderLayer, transformer_encoder_stack
from .similarity import patch_similarity, edge_features, neighbor_counts
from .head import UpsampleHead, upsample_head
from .loss import detection_loss, detection_terms, check_binary
from .detector import Detector, DetectorConfig, DetectorOutput
