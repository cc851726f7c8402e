import os

import numpy as np
import pytest

from blindpaint.config import Config, list_presets, parse_config_text
from blindpaint.errors import (
  CheckpointError, ContractError, DimensionError, NonFiniteLossError, ParseError, UnsupportedFormatError,
)
from blindpaint.harness import (
  LOG_COLUMNS, ManifestEntry, Models, TrainConfig, Trainer, TrainingData, build_configs, decode_checkpoint,
  encode_checkpoint, list_checks, load_checkpoint, load_image, load_mask, load_models, parse_manifest,
  parse_netpbm, read_manifest, resolve_configs, run_eval, run_gradcheck, run_synth, save_checkpoint,
  save_image, save_mask, save_models, train_two_stage, write_manifest,
)
from blindpaint.tensor import ParamStore
from blindpaint.utils import printer

from .conftest import face_like

# =============================================================================
# Images
# =============================================================================

class TestImages:

  def test_round_trip(self, tmp_path, rng):
    image = rng.random((5, 7, 3))
    path = str(tmp_path / 'a.ppm')
    save_image(path, image)
    assert np.max(np.abs(load_image(path) - image)) <= 0.5 / 255 + 1e-12

  def test_mask_is_p5(self, tmp_path):
    mask = np.zeros((4, 6))
    mask[1:3, 2:5] = 1.0
    path = str(tmp_path / 'm.pgm')
    save_mask(path, mask)
    with open(path, 'rb') as f:
      assert f.read(2) == b'P5'
    np.testing.assert_array_equal(load_mask(path), mask)

  def test_resize_on_load(self, tmp_path):
    path = str(tmp_path / 'big.ppm')
    save_image(path, np.full((512, 512, 3), 0.4))
    image = load_image(path, 256)
    assert image.shape == (256, 256, 3)
    np.testing.assert_allclose(image, round(0.4 * 255) / 255, atol=1e-6)

  def test_comments_in_header(self):
    data = b'P5\n# made by hand\n2 1\n255\n' + bytes([ 0, 255 ])
    np.testing.assert_array_equal(parse_netpbm(data)[:, :, 0], [ [ 0, 255 ] ])

  def test_maxval_must_be_255(self):
    with pytest.raises(UnsupportedFormatError):
      parse_netpbm(b'P6\n1 1\n65535\n' + bytes(6))

  def test_ascii_variant_is_unsupported(self):
    with pytest.raises(UnsupportedFormatError):
      parse_netpbm(b'P3\n1 1\n255\n0 0 0\n')

  def test_bad_magic(self):
    with pytest.raises(ParseError) as info:
      parse_netpbm(b'GIF89a')
    assert info.value.offset == 0

  def test_truncated(self):
    with pytest.raises(ParseError):
      parse_netpbm(b'P6\n2 2\n255\n' + bytes(5))

  def test_bad_width(self):
    with pytest.raises(ParseError) as info:
      parse_netpbm(b'P5\nx 2\n255\n')
    assert info.value.offset == 3

# =============================================================================
# Checkpoints
# =============================================================================

class TestCheckpoint:

  def test_round_trip(self, rng):
    tensors = { 'a': rng.standard_normal((2, 3)), 'b/c': rng.standard_normal(4), 'scalar': np.array(2.5) }
    decoded = decode_checkpoint(encode_checkpoint(tensors))
    assert list(decoded) == list(tensors)
    for name, array in tensors.items():
      assert decoded[name].shape == array.shape
      np.testing.assert_array_equal(decoded[name], array.astype(np.float32))

  def test_resave_is_byte_identical(self, tmp_path, rng):
    first, second = str(tmp_path / 'a.ftdr'), str(tmp_path / 'b.ftdr')
    save_checkpoint(first, { 'w': rng.standard_normal((3, 3)) })
    save_checkpoint(second, load_checkpoint(first))
    with open(first, 'rb') as a, open(second, 'rb') as b:
      assert a.read() == b.read()

  def test_bad_magic(self):
    with pytest.raises(CheckpointError):
      decode_checkpoint(b'NOTACHECKPOINT' + bytes(16))

  def test_corruption_is_detected(self, rng):
    data = bytearray(encode_checkpoint({ 'w': rng.standard_normal(8) }))
    data[20] ^= 0xFF
    with pytest.raises(CheckpointError):
      decode_checkpoint(bytes(data))

  def test_missing_file(self, tmp_path):
    with pytest.raises(CheckpointError):
      load_checkpoint(str(tmp_path / 'nope.ftdr'))

  def test_models_round_trip(self, tmp_path, rng):
    a, b = ParamStore(1), ParamStore(2)
    a.param('w', (2, 2))
    b.param('w', (3,))
    path = str(tmp_path / 'm.ftdr')
    save_models(path, { 'first': a, 'second': b })

    fresh_a, fresh_b, other = ParamStore(9), ParamStore(9), ParamStore(9)
    fresh_a.param('w', (2, 2))
    fresh_b.param('w', (3,))
    assert load_models(path, { 'first': fresh_a, 'second': fresh_b, 'third': other }) == [ 'first', 'second' ]
    np.testing.assert_allclose(fresh_a['w'].data, a['w'].data, rtol=1e-6)
    with pytest.raises(CheckpointError):
      load_models(path, { 'third': other }, strict=True)

  def test_model_shape_mismatch(self, tmp_path):
    store = ParamStore()
    store.param('w', (2, 2))
    path = str(tmp_path / 'm.ftdr')
    save_models(path, { 'model': store })
    wrong = ParamStore()
    wrong.param('w', (4,))
    with pytest.raises(DimensionError):
      load_models(path, { 'model': wrong })

# =============================================================================
# Manifest
# =============================================================================

class TestManifest:

  def test_parse(self):
    entries = parse_manifest('c.ppm\tm.pgm\tg.ppm\n\nc2.ppm\tm2.pgm\tg2.ppm\tl2.txt\n')
    assert entries == [ ManifestEntry('c.ppm', 'm.pgm', 'g.ppm'), ManifestEntry('c2.ppm', 'm2.pgm', 'g2.ppm', 'l2.txt') ]

  def test_parse_error_offset(self):
    with pytest.raises(ParseError) as info:
      parse_manifest('a\tb\tc\nonly two\tfields\n')
    assert info.value.offset == 6

  def test_paths_resolve_against_manifest(self, tmp_path):
    path = str(tmp_path / 'manifest.tsv')
    write_manifest(path, [ ManifestEntry('c.ppm', 'm.pgm', '/abs/g.ppm') ])
    entry, = read_manifest(path)
    assert entry.corrupted == os.path.join(str(tmp_path), 'c.ppm')
    assert entry.gt == '/abs/g.ppm'

# =============================================================================
# Settings
# =============================================================================

class TestSettings:

  def test_parse_config_text(self):
    settings = parse_config_text('steps = 10  # short run\nlr_generator = 1e-4\nuse_fad = false\n\n')
    assert settings == { 'steps': 10, 'lr_generator': 1e-4, 'use_fad': False }

  def test_parse_error(self):
    with pytest.raises(ContractError):
      parse_config_text('steps 10')

  def test_precedence(self, config, tmp_path):
    path = tmp_path / 'run.conf'
    path.write_text('image_size = 48\nsteps = 3\n')
    settings = config.resolve('toy', str(path), { 'steps': 7, 'seed': None })
    assert settings['image_size'] == 48
    assert settings['steps'] == 7
    assert settings['embed_dim'] == 16
    assert 'seed' not in settings

  def test_unknown_preset(self, config):
    with pytest.raises(ContractError):
      config.resolve('no_such_preset')

  def test_user_preset(self, tmp_path):
    config = Config(str(tmp_path / 'config'))
    os.makedirs(config.folders.get_path('presets'))
    with open(os.path.join(config.folders.get_path('presets'), 'mine.yaml'), 'w') as f:
      f.write('steps: 5\n')
    assert config.resolve('mine')['steps'] == 5
    assert list_presets(config.folders) == [ 'celeba', 'celeba_hq', 'mine', 'toy' ]

  def test_preset_must_be_mapping(self, tmp_path):
    config = Config(str(tmp_path / 'config'))
    os.makedirs(config.folders.get_path('presets'))
    with open(os.path.join(config.folders.get_path('presets'), 'flat.yml'), 'w') as f:
      f.write('- 1\n- 2\n')
    with pytest.raises(ContractError):
      config.resolve('flat')

  def test_build_configs(self, monkeypatch):
    warnings = []
    monkeypatch.setattr(printer, 'warn', warnings.append)
    configs = build_configs({ 'embed_dim': 12, 'lambda_style': 3.0, 'steps': 9, 'bogus': 1 })
    assert configs.detector.embed_dim == 12
    assert configs.losses.lambda_style == 3.0
    assert configs.train.steps == 9
    assert len(warnings) == 1 and 'bogus' in warnings[0]

  def test_resolve_configs(self, config):
    configs = resolve_configs('toy', overrides={ 'steps': 2 }, config=config)
    assert configs.train.image_size == 64 and configs.train.steps == 2
    assert configs.generator.gen_channels == (8, 16, 32)

# =============================================================================
# Training
# =============================================================================

def tiny_data(n=2, size=32, seed=0):
  rng = np.random.default_rng(seed)
  gt = np.stack([ face_like(size, size, seed=i) for i in range(n) ])
  masks = np.zeros((n, size, size))
  for i in range(n):
    top, left = rng.integers(0, size // 2, 2)
    masks[i, top:top + size // 2, left:left + size // 2] = 1.0
  corrupted = gt * (1.0 - masks[..., None]) + masks[..., None]
  return TrainingData.from_arrays(corrupted, masks, gt)

class TestTrainConfig:

  def test_stages(self):
    assert TrainConfig().stages() == [ 'detector', 'joint' ]
    assert TrainConfig(stage='inpainter').stages() == [ 'inpainter' ]
    cfg = TrainConfig(steps=10, joint_steps=4)
    assert cfg.steps_for('detector') == 10 and cfg.steps_for('joint') == 4
    assert TrainConfig(steps=10).steps_for('joint') == 10

  def test_batch_sizes(self):
    assert TrainConfig().batch_for('detector') == 16
    assert TrainConfig().batch_for('joint') == 8
    assert TrainConfig(batch_size=3).batch_for('detector') == 3

  @pytest.mark.parametrize('kwargs', [ { 'stage': 'pretrain' }, { 'steps': -1 } ])
  def test_invalid(self, kwargs):
    with pytest.raises(ContractError):
      TrainConfig(**kwargs)

class TestTrainer:

  def test_data_layout(self):
    data = tiny_data()
    assert data.corrupted.shape == (2, 3, 32, 32)
    assert data.masks.shape == (2, 1, 32, 32)
    assert data.landmarks.shape == (2, 68, 32, 32)
    assert data.frequency.shape == (2, 1, 32, 32)
    assert len(data) == 2

  def test_zero_steps_saves_the_initial_weights(self, tmp_path, tiny_configs):
    cfg = TrainConfig(stage='inpainter', steps=0)
    result = Trainer(cfg, tiny_configs, tiny_data(), str(tmp_path)).run()
    assert [ os.path.basename(p) for p in result.checkpoints ] == [ 'inpainter-000000.ftdr' ]
    saved = load_checkpoint(result.checkpoints[0])
    fresh = Models.for_stage(tiny_configs, 'inpainter', cfg.seed)
    for name, tensor in fresh.stores['generator'].items():
      np.testing.assert_array_equal(saved[f'generator/{name}'], tensor.data.astype(np.float32))

  def test_generator_step_leaves_discriminator(self, tmp_path, tiny_configs):
    trainer = Trainer(TrainConfig(stage='inpainter', steps=1), tiny_configs, tiny_data(), str(tmp_path))
    discriminator = trainer.models.stores['discriminator']
    generator = trainer.models.stores['generator']
    before = { name: t.data.copy() for name, t in discriminator.items() }
    gen_before = { name: t.data.copy() for name, t in generator.parameters() }
    batch = trainer.data.batch(np.arange(2))

    values, fake = trainer.generator_step(batch, blind=False)
    assert set(values) == { 'recons', 'adv', 'perc', 'style', 'tv', 'total' }
    for name, data in before.items():
      np.testing.assert_array_equal(discriminator[name].data, data)
    assert any(not np.array_equal(generator[name].data, data) for name, data in gen_before.items())

    gen_after = { name: t.data.copy() for name, t in generator.parameters() }
    trainer.discriminator_step(batch, fake)
    for name, data in gen_after.items():
      np.testing.assert_array_equal(generator[name].data, data)
    assert any(not np.array_equal(discriminator[name].data, data) for name, data in before.items())

  def test_joint_step_trains_the_detector(self, tmp_path, tiny_configs):
    trainer = Trainer(TrainConfig(stage='joint', steps=1), tiny_configs, tiny_data(), str(tmp_path))
    detector = trainer.models.stores['detector']
    before = { name: t.data.copy() for name, t in detector.parameters() }
    values = trainer.step('joint', trainer.data.batch(np.arange(2)))
    assert 'detection' in values and 'disc' in values
    assert any(not np.array_equal(detector[name].data, data) for name, data in before.items())

  def test_non_finite_loss(self, tmp_path, tiny_configs):
    data = tiny_data()
    data.corrupted[0, 0, 0, 0] = np.nan
    data.frequency[0, 0, 0, 0] = np.nan
    trainer = Trainer(TrainConfig(stage='detector', steps=2), tiny_configs, data, str(tmp_path))
    with pytest.raises(NonFiniteLossError) as info:
      trainer.run()
    assert info.value.step == 1
    assert info.value.checkpoint_path == trainer.result.checkpoints[0]
    assert os.path.basename(info.value.checkpoint_path) == 'detector-000000.ftdr'
    assert os.path.isfile(info.value.checkpoint_path)

  def test_log_is_deterministic(self, tmp_path, tiny_configs):
    cfg = TrainConfig(stage='two_stage', steps=1, batch_size=2)
    logs = []
    for run in ('a', 'b'):
      result = train_two_stage(cfg, tiny_data(), tiny_configs, str(tmp_path / run))
      with open(result.log_path) as f:
        logs.append(f.read())
      assert [ os.path.basename(p) for p in result.checkpoints ] == [
        'detector-000000.ftdr', 'detector-000001.ftdr', 'joint-000001.ftdr',
      ]
    assert logs[0] == logs[1]
    lines = logs[0].strip().split('\n')
    assert lines[0].split('\t') == list(LOG_COLUMNS)
    assert lines[1].split('\t')[:2] == [ '1', 'detector' ] and lines[1].split('\t')[3] == '-'
    assert lines[2].split('\t')[:2] == [ '2', 'joint' ]

  def test_init_checkpoint(self, tmp_path, tiny_configs):
    first = train_two_stage(TrainConfig(stage='detector', steps=1), tiny_data(), tiny_configs, str(tmp_path / 'a'))
    second = train_two_stage(
      TrainConfig(stage='detector', steps=0, seed=5), tiny_data(), tiny_configs, str(tmp_path / 'b'),
      init_checkpoint=first.checkpoints[-1],
    )
    a, b = load_checkpoint(first.checkpoints[-1]), load_checkpoint(second.checkpoints[-1])
    np.testing.assert_array_equal(a['detector/embed.stem.weight'], b['detector/embed.stem.weight'])

# =============================================================================
# Gradient suite
# =============================================================================

class TestGradSuite:

  def test_all_blocks_pass(self):
    results = run_gradcheck(seed=0)
    assert [ r.name for r in results ] == list_checks()
    failed = [ (r.name, r.error) for r in results if not r.passed ]
    assert not failed

  def test_deterministic(self):
    names = [ 'conv2d', 'region_norm', 'tv_loss' ]
    assert run_gradcheck(3, names) == run_gradcheck(3, names)

  def test_unknown_check(self):
    with pytest.raises(ContractError):
      run_gradcheck(0, [ 'softmax' ])

# =============================================================================
# Pipelines
# =============================================================================

class TestPipelines:

  def test_synth_is_deterministic(self, tmp_path, gt_dir):
    serial = run_synth(gt_dir, str(tmp_path / 'a'), 6, mask='freeform', seed=3)
    threaded = run_synth(gt_dir, str(tmp_path / 'b'), 6, mask='freeform', seed=3, workers=2)
    for sub in ('corrupted', 'masks'):
      for i in range(6):
        suffix = 'pgm' if sub == 'masks' else 'ppm'
        with open(tmp_path / 'a' / sub / f'{i:06d}.{suffix}', 'rb') as a, \
             open(tmp_path / 'b' / sub / f'{i:06d}.{suffix}', 'rb') as b:
          assert a.read() == b.read()
    entries = read_manifest(serial)
    assert len(entries) == 6 and entries[5].gt.endswith('gt/000005.ppm')
    assert os.path.basename(threaded) == 'manifest.tsv'

  def test_synth_fill_and_mask(self, tmp_path, gt_dir):
    out = tmp_path / 'out'
    run_synth(gt_dir, str(out), 2, fill='constant:0.0', mask='center')
    corrupted = load_image(str(out / 'corrupted' / '000001.ppm'))
    mask = load_mask(str(out / 'masks' / '000001.pgm'))
    assert mask.sum() == 16 * 16
    np.testing.assert_array_equal(corrupted[mask == 1.0], 0.0)

  def test_synth_mask_directory(self, tmp_path, gt_dir):
    masks = tmp_path / 'masks'
    masks.mkdir()
    given = np.zeros((32, 32))
    given[:4] = 1.0
    save_mask(str(masks / 'stripe.pgm'), given)
    out = tmp_path / 'out'
    run_synth(gt_dir, str(out), 2, mask=f'dir:{masks}')
    np.testing.assert_array_equal(load_mask(str(out / 'masks' / '000000.pgm')), given)

  def test_synth_needs_images(self, tmp_path):
    with pytest.raises(ContractError):
      run_synth(str(tmp_path), str(tmp_path / 'out'), 1)

  def test_eval_of_ground_truth(self, tmp_path, gt_dir, tiny_configs):
    out = tmp_path / 'synth'
    run_synth(gt_dir, str(out), 3)
    report = run_eval(str(out / 'gt'), str(out / 'gt'), str(out / 'masks'), str(tmp_path / 'eval.tsv'), tiny_configs)
    assert len(report.rows) == 3
    for row in report.rows:
      assert row.psnr == 100.0
      assert row.ssim == pytest.approx(1.0)
      assert row.interval == 2
    assert (tmp_path / 'eval.tsv').exists()
