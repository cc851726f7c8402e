import numpy as np
import pytest

from blindpaint.datagen import gen_center_mask
from blindpaint.harness import Models, TrainConfig, Trainer, TrainingData, build_configs
from blindpaint.metrics import mask_iou, psnr
from blindpaint.tensor import no_grad
from blindpaint.utils import to_nhwc

from .conftest import face_like

pytestmark = pytest.mark.slow

def square_masked(n, size, side, seed=0):
  rng = np.random.default_rng(seed)
  gt = np.stack([ face_like(size, size, seed=i) for i in range(n) ])
  masks = np.zeros((n, size, size))
  for i in range(n):
    top, left = rng.integers(0, size - side, 2)
    masks[i, top:top + side, left:left + side] = 1.0
  corrupted = gt * (1.0 - masks[..., None]) + masks[..., None]
  return TrainingData.from_arrays(corrupted, masks, gt)

def test_detector_overfits_square_masks(tmp_path, config):
  settings = config.load_preset('toy').settings
  configs = build_configs(settings, warn=False)
  data = square_masked(8, 64, 24)
  cfg = TrainConfig(stage='detector', steps=500, batch_size=8, lr_detector=1e-4)
  trainer = Trainer(cfg, configs, data, str(tmp_path))
  trainer.run()
  with no_grad():
    out = trainer.models.detector(data.corrupted, data.frequency)
  predicted = out.binarize(configs.detector.threshold)
  ious = [ mask_iou(predicted[i], data.masks[i, 0]) for i in range(len(data)) ]
  assert np.mean(ious) > 90.0

def test_inpainter_overfits_center_holes(tmp_path, config):
  configs = build_configs(config.load_preset('toy').settings, warn=False)
  size = 64
  gt = np.stack([ face_like(size, size, seed=i) for i in range(4) ])
  masks = np.stack([ gen_center_mask((size, size)) ] * 4)
  corrupted = gt * (1.0 - masks[..., None]) + masks[..., None]
  data = TrainingData.from_arrays(corrupted, masks, gt)
  # the toy widths need 10x the default generator rate to fit in 2000 steps
  cfg = TrainConfig(stage='inpainter', steps=2000, batch_size=4, lr_generator=1e-3)
  models = Models.for_stage(configs, 'inpainter')
  Trainer(cfg, configs, data, str(tmp_path), models).run()
  with no_grad():
    restored = models.generator(data.corrupted, data.masks, data.landmarks).composite
  restored = to_nhwc(restored)
  assert np.mean([ psnr(restored[i], gt[i], masks[i]) for i in range(4) ]) > 30.0
