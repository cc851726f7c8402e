import os
from concurrent.futures import ThreadPoolExecutor

from ..datagen import FillSource, MaskSpec, binary_masked, choose_index, parse_area, synthesize
from ..errors import CheckpointError, ContractError
from ..inpaint import FileLandmarks, Generator, TemplateLandmarks, generate
from ..losses import FeatureExtractor
from ..maskdetect import Detector
from ..metrics import EvalReport, METRICS, evaluate_sample
from ..tensor import ParamStore, no_grad
from ..utils import expand_path, list_files, mask_channel, mkdirp, printer, to_nchw, to_nhwc
from .checkpoint import load_models
from .images import load_mask, load_rgb, save_image, save_mask
from .manifest import ManifestEntry, write_manifest

IMAGE_EXTENSIONS = ( '.ppm', '.pgm' )

def _map(fn, items, workers):
  """Ordered map, on a thread pool when `workers` > 1."""
  if workers and workers > 1:
    with ThreadPoolExecutor(max_workers=workers) as pool:
      return list(pool.map(fn, items))
  return [ fn(item) for item in items ]

def _stem(path):
  return os.path.splitext(os.path.basename(path))[0]

def run_synth(gt_dir, out_dir, count, fill='constant:1.0', mask='block', seed=0, image_size=None,
              strokes=4, workers=1, area=None):
  """
  Writes `count` (corrupted, mask, gt) triplets and a manifest listing them.
  Sample i uses ground truth i mod |gt_dir| and seeds derived from seed ⊕ i.
  """
  gt_files = list_files(gt_dir, IMAGE_EXTENSIONS)
  if not gt_files:
    raise ContractError(f'No PPM/PGM images in {gt_dir}')
  fill_source = FillSource.parse(fill)

  mask_files = None
  if mask.startswith('dir:'):
    mask_dir = mask[4:]
    mask_files = list_files(mask_dir, IMAGE_EXTENSIONS)
    if not mask_files:
      raise ContractError(f'No PGM masks in {mask_dir}')
    spec = MaskSpec('file', None, seed, strokes)
  else:
    spec = MaskSpec(mask, parse_area(area) if area else None, seed, strokes)

  for sub in ('corrupted', 'masks', 'gt'):
    mkdirp(out_dir, sub)

  def make(index):
    gt = load_rgb(expand_path(gt_dir, gt_files[index % len(gt_files)]), image_size)
    given = None
    if mask_files:
      given = load_mask(expand_path(mask_dir, mask_files[choose_index(seed, index, 'mask', len(mask_files))]), gt.shape[:2])
    corrupted, mask_array = synthesize(gt, index, spec, fill_source, given)
    name = f'{index:06d}'
    entry = ManifestEntry(f'corrupted/{name}.ppm', f'masks/{name}.pgm', f'gt/{name}.ppm')
    save_image(expand_path(out_dir, entry.corrupted), corrupted)
    save_mask(expand_path(out_dir, entry.mask), mask_array)
    save_image(expand_path(out_dir, entry.gt), gt)
    return entry

  entries = _map(make, range(count), workers)
  manifest_path = expand_path(out_dir, 'manifest.tsv')
  write_manifest(manifest_path, entries)
  return manifest_path

class Inference:
  """Detector and generator restored from one checkpoint, for single images."""

  def __init__(self, checkpoint, configs, detector=True, generator=True):
    self.configs = configs
    self.detector = self.generator = None
    stores = {}
    if detector:
      stores['detector'] = ParamStore()
      self.detector = Detector(stores['detector'], configs.detector)
    if generator:
      stores['generator'] = ParamStore()
      self.generator = Generator(stores['generator'], configs.generator)

    loaded = load_models(checkpoint, stores)
    missing = [ name for name in stores if name not in loaded ]
    if missing:
      raise CheckpointError(f'Checkpoint {checkpoint} has no {" or ".join(missing)} weights')

  def landmarks(self, h, w, path=None, source_size=None):
    cfg = self.configs.generator
    if path:
      provider = FileLandmarks(path, cfg.landmarks, cfg.landmark_sigma, source_size)
    else:
      provider = TemplateLandmarks(cfg.landmarks, cfg.landmark_sigma)
    return provider(h, w).heatmap.transpose(2, 0, 1)[None]

  def detect(self, image):
    """H×W×3 image → detector output for a batch of one."""
    with no_grad():
      return self.detector(to_nchw(image))

  def inpaint(self, image, mask, landmarks):
    with no_grad():
      masked = to_nchw(binary_masked(image, mask))
      m = mask_channel(mask)
      return to_nhwc(generate(masked, m, landmarks, self.generator).data)[0]

def _image_size(configs, image_size):
  return image_size or configs.train.image_size

def run_detect(images, checkpoint, configs, out_dir, image_size=None):
  """Predicted binary mask and probability map per image."""
  model = Inference(checkpoint, configs, generator=False)
  mkdirp(out_dir)
  size = _image_size(configs, image_size)
  outputs = []
  for path in images:
    out = model.detect(load_rgb(path, size))
    stem = _stem(path)
    mask_path = expand_path(out_dir, f'{stem}_mask.pgm')
    prob_path = expand_path(out_dir, f'{stem}_prob.pgm')
    save_mask(mask_path, out.binarize(configs.detector.threshold)[0])
    save_image(prob_path, out.mask_prob.data[0])
    outputs.append((mask_path, prob_path))
  return outputs

def run_inpaint(image_path, checkpoint, configs, out_dir, mask_path=None, landmarks_path=None, image_size=None):
  """
  Restores one image. Without `mask_path` the detector predicts the mask
  first and it is written next to the result.
  """
  blind = mask_path is None
  model = Inference(checkpoint, configs, detector=blind)
  mkdirp(out_dir)
  size = _image_size(configs, image_size)
  image = load_rgb(image_path, size)
  stem = _stem(image_path)

  outputs = []
  if blind:
    mask = model.detect(image).binarize(configs.detector.threshold)[0]
    detected_path = expand_path(out_dir, f'{stem}_mask.pgm')
    save_mask(detected_path, mask)
    outputs.append(detected_path)
  else:
    mask = load_mask(mask_path, image.shape[:2])

  source_size = load_rgb(image_path).shape[:2] if landmarks_path else None
  landmarks = model.landmarks(*image.shape[:2], landmarks_path, source_size)
  restored_path = expand_path(out_dir, f'{stem}_restored.ppm')
  save_image(restored_path, model.inpaint(image, mask, landmarks))
  outputs.append(restored_path)
  return outputs

def run_eval(pred_dir, gt_dir, mask_dir, out_path, configs, detected_dir=None, workers=1):
  """
  Scores every prediction that has a ground truth and a mask of the same
  name; `detected_dir` adds mask-detection MAE and IoU.
  """
  names = [ name for name in list_files(pred_dir, IMAGE_EXTENSIONS) if os.path.exists(expand_path(gt_dir, name)) ]
  if not names:
    raise ContractError(f'No predictions in {pred_dir} match images in {gt_dir}')
  extractor = FeatureExtractor.from_config(configs.extractor)

  def mask_for(directory, name):
    for candidate in (name, _stem(name) + '.pgm'):
      path = expand_path(directory, candidate)
      if os.path.exists(path):
        return path
    raise ContractError(f'No mask for {name} in {directory}')

  def score(name):
    pred = load_rgb(expand_path(pred_dir, name))
    gt = load_rgb(expand_path(gt_dir, name))
    mask = load_mask(mask_for(mask_dir, name), gt.shape[:2])
    detected = None
    if detected_dir:
      detected = load_mask(mask_for(detected_dir, name), gt.shape[:2])
    return evaluate_sample(_stem(name), pred, gt, mask, extractor, detected=detected)

  report = EvalReport(_map(score, names, workers))
  report.write(out_path)
  printer.table('Evaluation', [ 'group', 'count', *METRICS ], report.table_rows())
  return report
