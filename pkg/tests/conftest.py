import numpy as np
import pytest

from blindpaint.config import Config
from blindpaint.harness import build_configs, save_image

TINY_SETTINGS = {
  'image_size': 32,
  'embed_dim': 8,
  'heads': 2,
  'layers': 1,
  'mlp_hidden': 8,
  'freq_tower': [ 4 ],
  'head_channels': [ 4, 4, 4 ],
  'gen_channels': [ 4, 8, 8 ],
  'disc_channels': 4,
  'extractor_channels': [ 2, 4, 4, 4, 4 ],
  'batch_size': 2,
  'steps': 1,
}

def face_like(h, w, seed=0):
  """Smooth shaded oval on a gradient background, with a little texture."""
  rng = np.random.default_rng(seed)
  ys, xs = np.mgrid[0:h, 0:w] / np.array([ h, w ])[:, None, None]
  oval = ((xs - 0.5) / 0.35) ** 2 + ((ys - 0.5) / 0.45) ** 2 < 1.0
  base = np.stack([ 0.3 + 0.4 * xs, 0.3 + 0.3 * ys, 0.5 - 0.2 * xs ], axis=2)
  skin = np.array([ 0.85, 0.65, 0.55 ]) * (0.8 + 0.2 * ys)[:, :, None]
  image = np.where(oval[:, :, None], skin, base)
  image += 0.02 * rng.standard_normal((h, w, 3))
  return np.clip(image, 0.0, 1.0)

@pytest.fixture
def rng():
  return np.random.default_rng(0)

@pytest.fixture
def config(tmp_path):
  return Config(str(tmp_path / 'config'))

@pytest.fixture
def tiny_settings():
  return dict(TINY_SETTINGS)

@pytest.fixture
def tiny_configs(tiny_settings):
  return build_configs(tiny_settings, warn=False)

@pytest.fixture
def gt_dir(tmp_path):
  path = tmp_path / 'gt'
  path.mkdir()
  for i in range(4):
    save_image(str(path / f'face{i}.ppm'), face_like(32, 32, seed=i))
  return str(path)
