from .images import (
  parse_netpbm, encode_netpbm, decode_image, load_image, load_rgb, load_mask, save_image, save_mask, resize, to_bytes,
)
from .checkpoint import encode_checkpoint, decode_checkpoint, save_checkpoint, load_checkpoint, save_models, load_models
from .manifest import ManifestEntry, parse_manifest, read_manifest, write_manifest
from .train import TrainConfig, TrainingData, TrainingLog, Models, Trainer, train_two_stage, LOG_COLUMNS, STAGES
from .settings import build_configs, resolve_configs
from .gradsuite import CheckResult, register_check, run_check, run_gradcheck, list_checks, TOLERANCE
from .pipelines import Inference, run_synth, run_detect, run_inpaint, run_eval
from .visualize import run_visualize, rescale
