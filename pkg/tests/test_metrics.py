import numpy as np
import pytest

from blindpaint.errors import ContractError, DimensionError
from blindpaint.losses import FeatureExtractor
from blindpaint.metrics import (
  METRICS, PSNR_CAP, EvalReport, EvalRow, evaluate_sample, ics, identity_features, mask_iou, mask_mae, psnr, ssim,
)

from .conftest import face_like

@pytest.fixture
def extractor():
  return FeatureExtractor((4, 8, 8, 8, 8), seed=1)

class TestPSNR:

  def test_known_value(self):
    assert psnr(np.zeros((4, 4, 3)), np.full((4, 4, 3), 0.5)) == pytest.approx(6.0206, abs=1e-4)

  def test_identical_is_capped(self, rng):
    image = rng.random((4, 4, 3))
    assert psnr(image, image) == PSNR_CAP

  def test_falls_with_noise(self, rng):
    gt = rng.random((16, 16, 3))
    values = [ psnr(np.clip(gt + s * rng.standard_normal(gt.shape), 0, 1), gt) for s in (0.01, 0.05, 0.2) ]
    assert values[0] > values[1] > values[2]

  def test_shape_mismatch(self):
    with pytest.raises(DimensionError):
      psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))

  def test_masked_region_only(self):
    gt = np.zeros((4, 4, 3))
    pred = gt.copy()
    mask = np.zeros((4, 4))
    mask[:2, :2] = 1.0
    pred[:2, :2] = 0.5
    assert psnr(pred, gt, mask) == pytest.approx(6.0206, abs=1e-4)
    assert psnr(pred, gt) == pytest.approx(6.0206 + 10.0 * np.log10(4.0), abs=1e-4)

  def test_masked_needs_pixels(self):
    with pytest.raises(ContractError):
      psnr(np.zeros((4, 4, 3)), np.ones((4, 4, 3)), np.zeros((4, 4)))
    with pytest.raises(DimensionError):
      psnr(np.zeros((4, 4, 3)), np.ones((4, 4, 3)), np.ones((3, 4)))

class TestSSIM:

  def test_identical(self):
    image = face_like(32, 32)
    assert ssim(image, image) == pytest.approx(1.0)

  def test_symmetric(self, rng):
    a, b = face_like(32, 32, seed=1), face_like(32, 32, seed=2)
    assert ssim(a, b) == pytest.approx(ssim(b, a))

  def test_negative_scores_low(self, rng):
    image = rng.random((24, 24, 3))
    assert ssim(1.0 - image, image) < 0.5

  def test_noise_lowers_score(self, rng):
    gt = face_like(32, 32)
    noisy = np.clip(gt + 0.1 * rng.standard_normal(gt.shape), 0, 1)
    assert ssim(noisy, gt) < ssim(gt, gt)

  def test_too_small(self):
    with pytest.raises(ContractError):
      ssim(np.zeros((8, 16, 3)), np.zeros((8, 16, 3)))

class TestMaskMetrics:

  def test_mae(self):
    assert mask_mae(np.full((4, 4), 0.5), np.ones((4, 4))) == pytest.approx(50.0)

  def test_iou(self):
    pred, gt = np.zeros((4, 8)), np.zeros((4, 8))
    pred[:, :4] = 1.0
    gt[:, 2:6] = 1.0
    assert mask_iou(pred, gt) == pytest.approx(100.0 / 3)

  def test_iou_both_empty(self):
    assert mask_iou(np.zeros((3, 3)), np.zeros((3, 3))) == 100.0

class TestIdentity:

  def test_identical(self, extractor):
    image = face_like(32, 32)
    assert ics(image, image, extractor) == pytest.approx(1.0)

  def test_symmetric_and_bounded(self, extractor):
    a, b = face_like(32, 32, seed=1), np.random.default_rng(3).random((32, 32, 3))
    value = ics(a, b, extractor)
    assert value == pytest.approx(ics(b, a, extractor))
    assert -1.0 <= value <= 1.0

  def test_black_image_is_degenerate(self, extractor):
    assert ics(np.zeros((32, 32, 3)), face_like(32, 32), extractor) == 0.0

  def test_independent_noise_scores_low(self, extractor):
    values = []
    for seed in range(100):
      rng = np.random.default_rng(seed)
      values.append(ics(rng.random((128, 128, 3)), rng.random((128, 128, 3)), extractor))
    values = np.abs(values)
    assert values.mean() < 0.5
    assert np.mean(values < 0.5) >= 0.9

  def test_pooled_features_share_the_channel_means(self, extractor):
    rng = np.random.default_rng(0)
    a, b = rng.random((128, 128, 3)), rng.random((128, 128, 3))
    assert identity_features(a, extractor, pooled=True).shape == (8,)
    assert ics(a, b, extractor, pooled=True) > 0.5
    assert ics(a, a, extractor, pooled=True) == pytest.approx(1.0)

class TestReport:

  def test_sample_and_groups(self, extractor):
    gt = face_like(32, 32)
    mask = np.zeros((32, 32))
    mask[8:24, 8:24] = 1.0
    row = evaluate_sample('a', gt, gt, mask, extractor, detected=mask)
    assert row.interval == 2 and row.center
    assert row.psnr == PSNR_CAP and row.iou == 100.0 and row.mae == 0.0
    assert 'psnr_cap' in row.flags

    report = EvalReport([ row ])
    aggregates = report.aggregates()
    assert aggregates['20-30%'][0] == 1 and aggregates['center'][0] == 1 and aggregates['0-10%'][0] == 0
    assert aggregates['all'][1]['psnr'] == PSNR_CAP

  def test_missing_mask_metrics(self, tmp_path):
    rows = [ EvalRow('x', 0, 30.0, 0.9, 0.8), EvalRow('y', 1, 20.0, 0.7, 0.6, mae=10.0, iou=50.0) ]
    report = EvalReport(rows)
    assert report.aggregates()['all'][1]['iou'] == 50.0
    path = tmp_path / 'eval.tsv'
    report.write(str(path))
    lines = path.read_text().split('\n')
    assert lines[0].split('\t') == [ 'id', 'interval', *METRICS, 'flags' ]
    assert lines[1].split('\t') == [ 'x', '0-10%', '30.000000', '0.900000', '-', '-', '0.800000', '-' ]
    assert '# all\t2\t25.000000\t0.800000\t10.000000\t50.000000\t0.700000' in lines
