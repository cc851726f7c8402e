from collections import OrderedDict
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..adversary import Discriminator, discriminate, discriminator_adversarial_loss, generator_adversarial_loss
from ..config import FromSettings
from ..datagen import binary_masked
from ..errors import ContractError, NonFiniteLossError
from ..frequency import HighPassConfig, frequency_batch
from ..inpaint import FileLandmarks, Generator, TemplateLandmarks, landmark_batch
from ..losses import (
  FeatureExtractor, perceptual_loss, reconstruction_loss, style_loss, total_loss, tv_loss,
)
from ..maskdetect import Detector, detection_loss
from ..tensor import Adam, Graph, ParamStore, Tensor, backward, ops
from ..utils import DotDict, derive_seed, expand_path, make_rng, mkdirp, printer, to_nchw
from .checkpoint import load_models, save_models
from .images import load_mask, load_rgb
from .manifest import read_manifest

STAGES = ( 'detector', 'joint', 'inpainter', 'two_stage' )
LOG_COLUMNS = ( 'step', 'stage', 'detection', 'recons', 'adv', 'perc', 'style', 'tv', 'total', 'disc' )

@dataclass
class TrainConfig(FromSettings):
  stage: str = 'two_stage'
  steps: int = 1000
  joint_steps: int = 0
  batch_size: int = 0
  batch_size_detector: int = 16
  batch_size_joint: int = 8
  lr_generator: float = 1e-4
  lr_discriminator: float = 1e-5
  lr_detector: float = 1e-4
  beta1: float = 0.0
  beta2: float = 0.9
  eps: float = 1e-8
  lambda_detect: float = 1.0
  seed: int = 0
  image_size: int = 256
  checkpoint_every: int = 0

  def __post_init__(self):
    if self.stage not in STAGES:
      raise ContractError(f'Unknown stage "{self.stage}", expected one of {", ".join(STAGES)}')
    if self.steps < 0 or self.joint_steps < 0:
      raise ContractError('Step counts must be >= 0')

  def batch_for(self, stage):
    if self.batch_size:
      return self.batch_size
    return self.batch_size_detector if stage == 'detector' else self.batch_size_joint

  def stages(self):
    return [ 'detector', 'joint' ] if self.stage == 'two_stage' else [ self.stage ]

  def steps_for(self, stage):
    if self.stage == 'two_stage' and stage == 'joint':
      return self.joint_steps or self.steps
    return self.steps

@dataclass
class TrainingData:
  corrupted: np.ndarray  # N×3×H×W
  masks: np.ndarray  # N×1×H×W
  gt: np.ndarray  # N×3×H×W
  landmarks: np.ndarray  # N×K×H×W
  frequency: np.ndarray  # N×1×H×W

  def __len__(self):
    return self.gt.shape[0]

  def batch(self, indices):
    return DotDict({
      'corrupted': self.corrupted[indices],
      'masks': self.masks[indices],
      'gt': self.gt[indices],
      'landmarks': self.landmarks[indices],
      'frequency': self.frequency[indices],
    })

  @classmethod
  def from_arrays(cls, corrupted, masks, gt, landmarks=None, landmark_count=68, sigma=2.0, alpha=0.08):
    """NHWC images and N×H×W masks; template landmarks when none are given."""
    corrupted = np.asarray(corrupted, dtype=np.float64)
    n, h, w, _ = corrupted.shape
    if landmarks is None:
      landmarks = landmark_batch([ TemplateLandmarks(landmark_count, sigma) ] * n, h, w)
    return cls(
      corrupted=to_nchw(corrupted),
      masks=np.asarray(masks, dtype=np.float64)[:, None],
      gt=to_nchw(gt),
      landmarks=np.asarray(landmarks, dtype=np.float64),
      frequency=frequency_batch(corrupted, HighPassConfig(alpha)),
    )

  @classmethod
  def from_manifest(cls, path, image_size, landmark_count=68, sigma=2.0, alpha=0.08):
    entries = read_manifest(path)
    if not entries:
      raise ContractError(f'Manifest {path} is empty')
    size = (image_size, image_size)
    corrupted, masks, gts, providers = [], [], [], []
    for entry in entries:
      gt = load_rgb(entry.gt)
      if entry.landmarks:
        providers.append(FileLandmarks(entry.landmarks, landmark_count, sigma, source_size=gt.shape[:2]))
      else:
        providers.append(TemplateLandmarks(landmark_count, sigma))
      gts.append(load_rgb(entry.gt, size))
      corrupted.append(load_rgb(entry.corrupted, size))
      masks.append(load_mask(entry.mask, size))
    landmarks = landmark_batch(providers, image_size, image_size)
    return cls.from_arrays(np.stack(corrupted), np.stack(masks), np.stack(gts), landmarks, landmark_count, sigma, alpha)

class Models:
  """The networks a stage trains, each with its own ParamStore."""

  def __init__(self, configs, seed=0, detector=True, generator=True):
    self.configs = configs
    self.stores = OrderedDict()
    self.detector = self.generator = self.discriminator = self.extractor = None

    if detector:
      self.stores['detector'] = ParamStore(derive_seed(seed, 'detector'))
      self.detector = Detector(self.stores['detector'], configs.detector)
    if generator:
      self.stores['generator'] = ParamStore(derive_seed(seed, 'generator'))
      self.generator = Generator(self.stores['generator'], configs.generator)
      self.stores['discriminator'] = ParamStore(derive_seed(seed, 'discriminator'))
      self.discriminator = Discriminator(self.stores['discriminator'], configs.discriminator)
      self.extractor = FeatureExtractor.from_config(configs.extractor)

  @classmethod
  def for_stage(cls, configs, stage, seed=0):
    return cls(configs, seed, detector=stage != 'inpainter', generator=stage != 'detector')

class TrainingLog:
  """Tab-separated loss log with a header line; values absent from a stage print as "-"."""

  def __init__(self, path):
    self.path = path
    self.file = open(path, 'w', encoding='utf-8', newline='\n')
    self.file.write('\t'.join(LOG_COLUMNS) + '\n')

  def write(self, step, stage, values):
    cells = [ str(step), stage ]
    for column in LOG_COLUMNS[2:]:
      value = values.get(column)
      cells.append('-' if value is None else f'{value:.10g}')
    self.file.write('\t'.join(cells) + '\n')
    self.file.flush()

  def close(self):
    self.file.close()

  def __enter__(self):
    return self

  def __exit__(self, *args):
    self.close()

@dataclass
class TrainResult:
  checkpoints: List[str] = field(default_factory=list)
  log_path: Optional[str] = None
  last_values: dict = field(default_factory=dict)

class Trainer:
  """
  Runs the training stages: the detector alone, then detector, generator and
  discriminator jointly (or generator and discriminator on known masks).
  Generator and discriminator steps alternate, each updating only its own store.
  """

  def __init__(self, cfg, configs, data, out_dir, models=None):
    self.cfg = cfg
    self.configs = configs
    self.data = data
    self.out_dir = mkdirp(out_dir)
    self.models = models or Models.for_stage(configs, cfg.stage, cfg.seed)
    self.weights = configs.losses
    self.global_step = 0
    self.last_checkpoint = None
    self.result = TrainResult()

    lrs = { 'detector': cfg.lr_detector, 'generator': cfg.lr_generator, 'discriminator': cfg.lr_discriminator }
    self.optimizers = {
      name: Adam(store, lrs[name], cfg.beta1, cfg.beta2, cfg.eps)
      for name, store in self.models.stores.items()
    }

  def check_finite(self, loss):
    if not np.isfinite(loss.data).all():
      raise NonFiniteLossError(self.global_step, self.last_checkpoint)

  def detector_step(self, batch):
    with Graph():
      out = self.models.detector(batch.corrupted, batch.frequency)
      loss = detection_loss(out.mask_prob, batch.masks[:, 0])
      self.check_finite(loss)
      backward(loss)
      self.optimizers['detector'].step()
    return { 'detection': loss.item(), 'total': loss.item() }

  def predicted_mask(self, batch):
    """Binarized detector output whose gradient is that of the probabilities."""
    out = self.models.detector(batch.corrupted, batch.frequency)
    n, h, w = out.mask_prob.shape
    prob = ops.reshape(out.mask_prob, (n, 1, h, w))
    hard = (prob.data > self.configs.detector.threshold).astype(np.float64)
    return ops.straight_through(hard, prob), detection_loss(out.mask_prob, batch.masks[:, 0])

  def generator_step(self, batch, blind):
    models = self.models
    with Graph():
      if blind:
        mask, detect = self.predicted_mask(batch)
      else:
        mask, detect = Tensor(batch.masks), None

      masked = binary_masked(Tensor(batch.corrupted), mask)
      pred = models.generator(masked, mask, batch.landmarks).composite
      d_fake = discriminate(pred, batch.landmarks, models.discriminator, update=False)
      terms = {
        'recons': reconstruction_loss(pred, batch.gt, mask),
        'adv': generator_adversarial_loss(d_fake),
        'perc': perceptual_loss(pred, batch.gt, models.extractor),
        'style': style_loss(pred, batch.gt, mask, models.extractor),
        'tv': tv_loss(pred),
      }
      total = total_loss(terms, self.weights)
      if detect is not None:
        total = ops.add(total, ops.scale(detect, self.cfg.lambda_detect))
      self.check_finite(total)
      backward(total)

      self.optimizers['generator'].step()
      if blind:
        self.optimizers['detector'].step()
      models.stores['discriminator'].zero_grad()

    values = { name: term.item() for name, term in terms.items() }
    values['total'] = total.item()
    if detect is not None:
      values['detection'] = detect.item()
    return values, pred.data

  def discriminator_step(self, batch, fake):
    discriminator = self.models.discriminator
    with Graph():
      d_fake = discriminate(fake, batch.landmarks, discriminator, update=True)
      d_real = discriminate(batch.gt, batch.landmarks, discriminator, update=False)
      loss = discriminator_adversarial_loss(d_fake, d_real, standard=self.configs.discriminator.lsgan_standard)
      self.check_finite(loss)
      backward(loss)
      self.optimizers['discriminator'].step()
    return { 'disc': loss.item() }

  def step(self, stage, batch):
    if stage == 'detector':
      return self.detector_step(batch)
    values, fake = self.generator_step(batch, blind=stage == 'joint')
    values.update(self.discriminator_step(batch, fake))
    return values

  def save(self, stage, step):
    path = expand_path(self.out_dir, f'{stage}-{step:06d}.ftdr')
    save_models(path, self.models.stores)
    self.last_checkpoint = path
    if path not in self.result.checkpoints:
      self.result.checkpoints.append(path)
    return path

  def run_stage(self, stage, steps, log):
    if stage != 'detector' and self.models.generator is None:
      raise ContractError(f'Stage "{stage}" needs the generator models')
    if stage != 'inpainter' and self.models.detector is None:
      raise ContractError(f'Stage "{stage}" needs the detector')

    batch_size = min(self.cfg.batch_for(stage), len(self.data))
    every = self.cfg.checkpoint_every
    with printer.progress(stage, steps) as advance:
      for step in range(1, steps + 1):
        self.global_step += 1
        indices = make_rng(self.cfg.seed, stage, step).permutation(len(self.data))[:batch_size]
        values = self.step(stage, self.data.batch(indices))
        log.write(self.global_step, stage, values)
        self.result.last_values = values
        if every and step % every == 0 and step != steps:
          self.save(stage, step)
        advance()
    self.save(stage, steps)

  def run(self):
    self.result.log_path = expand_path(self.out_dir, 'train.log')
    stages = self.cfg.stages()
    # step-0 weights; the first non-finite loss reports this file
    self.save(stages[0], 0)
    with TrainingLog(self.result.log_path) as log:
      for stage in stages:
        self.run_stage(stage, self.cfg.steps_for(stage), log)
    return self.result

def train_two_stage(cfg, manifest, configs, out_dir, init_checkpoint=None):
  """Loads the manifest, builds the models for `cfg.stage` and trains them."""
  data = manifest if isinstance(manifest, TrainingData) else TrainingData.from_manifest(
    manifest, cfg.image_size, configs.generator.landmarks, configs.generator.landmark_sigma, configs.detector.alpha,
  )
  models = Models.for_stage(configs, cfg.stage, cfg.seed)
  if init_checkpoint:
    loaded = load_models(init_checkpoint, models.stores)
    printer.print(f'Initialized {", ".join(loaded) or "nothing"} from {init_checkpoint}')
  return Trainer(cfg, configs, data, out_dir, models).run()
