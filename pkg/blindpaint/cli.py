import functools, sys
from typing import List, Optional

import typer

from .config import Config, list_presets
from .errors import BlindpaintError
from .harness import (
  Inference, list_checks, resolve_configs, run_detect, run_eval, run_gradcheck, run_inpaint, run_synth,
  run_visualize, train_two_stage,
)
from .utils import DotDict, printer

config = Config()
state = DotDict({ 'preset': None, 'config_file': None, 'traceback': False, 'ablate': [] })
ABLATIONS = ( 'dual', 'fad', 'ps' )

app = typer.Typer(
  add_completion=False,
  pretty_exceptions_enable=False,
  pretty_exceptions_short=False,
  help='Blind face inpainting toolkit. Try "blindpaint gradcheck".',
)

@app.callback()
def main(
    preset: Optional[str] = typer.Option(None, '--preset', '-p', help='Builtin or user preset name'),
    config_file: Optional[str] = typer.Option(None, '--config', '-c', help='key = value settings file'),
    quiet: bool = typer.Option(False, '--quiet', '-q'),
    traceback: bool = typer.Option(False, '--traceback', help='Show tracebacks on errors'),
    ablate: Optional[List[str]] = typer.Option(None, '--ablate', help='Switch off a detector part: dual, fad or ps'),
):
  state.preset = preset
  state.config_file = config_file
  state.traceback = traceback
  for name in ablate or []:
    if name not in ABLATIONS:
      raise typer.BadParameter(f'{name} is not one of {", ".join(ABLATIONS)}', param_hint='--ablate')
  state.ablate = list(ablate or [])
  printer.set_quiet(quiet)

def guarded(fn):
  """Turns any error into a message on stderr and exit code 1."""
  @functools.wraps(fn)
  def wrapper(*args, **kwargs):
    try:
      return fn(*args, **kwargs)
    except typer.Exit:
      raise
    except BlindpaintError as e:
      printer.exception(e, show_traceback=state.traceback)
      raise typer.Exit(1)
    except Exception as e:
      printer.exception(e, show_traceback=True)
      raise typer.Exit(1)
  return wrapper

def configs(**overrides):
  for name in state.ablate:
    overrides[f'use_{name}'] = False
  return resolve_configs(state.preset, state.config_file, overrides, config)

@app.command()
@guarded
def synth(
    gt_dir: str = typer.Option(..., '--gt-dir', help='Directory of ground-truth PPM images'),
    out_dir: str = typer.Option(..., '--out-dir', '-o'),
    count: int = typer.Option(..., '--count', '-n'),
    fill: str = typer.Option('constant:1.0', '--fill', help='constant:<v> or dir:<path>'),
    mask: str = typer.Option('block', '--mask', help='block, center, freeform or dir:<path>'),
    seed: int = typer.Option(0, '--seed'),
    image_size: Optional[int] = typer.Option(None, '--image-size'),
    strokes: int = typer.Option(4, '--strokes'),
    area: Optional[str] = typer.Option(None, '--area', help='Mask area fraction interval lo:hi'),
    workers: int = typer.Option(1, '--workers', '-j'),
):
  """Synthesizes (corrupted, mask, gt) triplets and a manifest."""
  manifest = run_synth(gt_dir, out_dir, count, fill, mask, seed, image_size, strokes, workers, area)
  printer.print(f'Wrote {count} samples, manifest {manifest}', markup=False)

@app.command()
@guarded
def detect(
    images: List[str] = typer.Argument(..., help='PPM images to scan'),
    checkpoint: str = typer.Option(..., '--checkpoint', '-k'),
    out_dir: str = typer.Option('.', '--out-dir', '-o'),
    image_size: Optional[int] = typer.Option(None, '--image-size'),
):
  """Predicts corruption masks without being told where they are."""
  for mask_path, prob_path in run_detect(images, checkpoint, configs(image_size=image_size), out_dir):
    printer.print(f'{mask_path}\t{prob_path}', markup=False)

@app.command()
@guarded
def inpaint(
    image: str = typer.Option(..., '--image', '-i'),
    checkpoint: str = typer.Option(..., '--checkpoint', '-k'),
    mask: Optional[str] = typer.Option(None, '--mask', '-m', help='Known mask; detected when omitted'),
    landmarks: Optional[str] = typer.Option(None, '--landmarks', help='File of "x y" lines'),
    out_dir: str = typer.Option('.', '--out-dir', '-o'),
    image_size: Optional[int] = typer.Option(None, '--image-size'),
):
  """Restores an image, detecting the mask first unless one is given."""
  for path in run_inpaint(image, checkpoint, configs(image_size=image_size), out_dir, mask, landmarks):
    printer.print(path, markup=False)

@app.command()
@guarded
def train(
    manifest: str = typer.Option(..., '--manifest'),
    out_dir: str = typer.Option(..., '--out-dir', '-o'),
    stage: Optional[str] = typer.Option(None, '--stage', help='detector, joint, inpainter or two_stage'),
    steps: Optional[int] = typer.Option(None, '--steps'),
    joint_steps: Optional[int] = typer.Option(None, '--joint-steps'),
    batch_size: Optional[int] = typer.Option(None, '--batch-size'),
    lr_generator: Optional[float] = typer.Option(None, '--lr-generator'),
    lr_discriminator: Optional[float] = typer.Option(None, '--lr-discriminator'),
    lr_detector: Optional[float] = typer.Option(None, '--lr-detector'),
    seed: Optional[int] = typer.Option(None, '--seed'),
    image_size: Optional[int] = typer.Option(None, '--image-size'),
    checkpoint_every: Optional[int] = typer.Option(None, '--checkpoint-every'),
    init: Optional[str] = typer.Option(None, '--init', help='Checkpoint to start from'),
):
  """Trains the detector, then detector and inpainter jointly."""
  resolved = configs(
    stage=stage, steps=steps, joint_steps=joint_steps, batch_size=batch_size, lr_generator=lr_generator,
    lr_discriminator=lr_discriminator, lr_detector=lr_detector, seed=seed, image_size=image_size,
    checkpoint_every=checkpoint_every,
  )
  result = train_two_stage(resolved.train, manifest, resolved, out_dir, init)
  for path in result.checkpoints:
    printer.print(path, markup=False)
  printer.print(f'Log: {result.log_path}', markup=False)

@app.command(name='eval')
@guarded
def evaluate(
    pred_dir: str = typer.Option(..., '--pred-dir'),
    gt_dir: str = typer.Option(..., '--gt-dir'),
    mask_dir: str = typer.Option(..., '--mask-dir'),
    detected_dir: Optional[str] = typer.Option(None, '--detected-dir', help='Predicted masks, scored by MAE and IoU'),
    out: str = typer.Option('eval.tsv', '--out', '-o'),
    workers: int = typer.Option(1, '--workers', '-j'),
):
  """Scores restored images per mask-area interval."""
  run_eval(pred_dir, gt_dir, mask_dir, out, configs(), detected_dir, workers)
  printer.print(f'Report: {out}', markup=False)

@app.command()
@guarded
def gradcheck(
    seed: int = typer.Option(0, '--seed'),
    checks: Optional[List[str]] = typer.Option(None, '--check', help='Run only these checks'),
    max_entries: int = typer.Option(24, '--max-entries'),
):
  """Compares every block's backward pass with central differences."""
  names = checks or list_checks()
  with printer.progress('gradcheck', len(names)) as advance:
    results = run_gradcheck(seed, names, max_entries=max_entries, progress=advance)
  printer.table(
    f'Gradient check (seed {seed})',
    [ 'block', 'tensors', 'max rel. error', 'status' ],
    [ [ r.name, r.tensors, f'{r.error:.3e}', 'ok' if r.passed else 'FAIL' ] for r in results ],
  )
  if not all(r.passed for r in results):
    raise typer.Exit(1)

@app.command()
@guarded
def visualize(
    image: str = typer.Option(..., '--image', '-i'),
    checkpoint: str = typer.Option(..., '--checkpoint', '-k'),
    out_dir: str = typer.Option('.', '--out-dir', '-o'),
    layer: int = typer.Option(-1, '--layer', help='Encoder layer whose attention is dumped'),
    image_size: Optional[int] = typer.Option(None, '--image-size'),
):
  """Dumps the frequency, edge, attention and mask panels of one detection."""
  inference = Inference(checkpoint, configs(image_size=image_size), generator=False)
  for path in run_visualize(image, inference, out_dir, layer=layer):
    printer.print(path, markup=False)

@app.command()
def presets():
  for name in list_presets(config.folders):
    printer.print(name)

def apply_aliases():
  if len(sys.argv) < 2:
    sys.argv += [ '--help' ]
    return
  if sys.argv[1] == 'help':
    sys.argv.pop(1)
    sys.argv += [ '--help' ]

def run():
  apply_aliases()
  app()

if __name__ == '__main__':
  run()
