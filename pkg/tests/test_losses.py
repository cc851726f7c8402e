import numpy as np
import pytest

from blindpaint.errors import ContractError, DimensionError
from blindpaint.losses import (
  LOSS_TERMS, ExtractorConfig, FeatureExtractor, LossWeights, gram, perceptual_loss, reconstruction_loss, style_loss,
  total_loss, tv_loss,
)
from blindpaint.tensor import Tensor

@pytest.fixture
def extractor():
  return FeatureExtractor((3, 4, 4, 4, 4), seed=7)

class TestWeights:

  @pytest.mark.parametrize('preset,total', [ ('celeba_hq', 251.21), ('celeba', 255.21) ])
  def test_preset_unit_sums(self, config, preset, total):
    weights = LossWeights.preset(preset, config)
    assert sum(weight for _, weight in weights.items()) == pytest.approx(total)

  def test_negative_weight(self):
    with pytest.raises(ContractError):
      LossWeights(lambda_tv=-0.1)

  def test_from_settings(self):
    weights = LossWeights.from_settings({ 'lambda_style': 120, 'image_size': 64 })
    assert dict(weights.items())['style'] == 120.0
    assert [ term for term, _ in weights.items() ] == list(LOSS_TERMS)

  def test_total_is_the_weighted_sum(self):
    terms = { 'recons': Tensor(2.0), 'adv': Tensor(3.0), 'style': Tensor(0.01) }
    weights = LossWeights(lambda_recons=5.0, lambda_adv=0.1, lambda_style=100.0)
    assert total_loss(terms, weights).item() == pytest.approx(10.0 + 0.3 + 1.0)

class TestReconstruction:

  def test_counts_masked_elements_across_channels(self):
    pred, gt = np.zeros((1, 3, 4, 4)), np.zeros((1, 3, 4, 4))
    pred[:, :, :2, :2] = 0.5
    mask = np.zeros((1, 1, 4, 4))
    mask[:, :, :2, :] = 1.0
    # 12 errors of 0.5 over 3·8 masked elements
    assert reconstruction_loss(pred, gt, mask).item() == pytest.approx(0.25)

  def test_empty_mask(self, rng):
    assert reconstruction_loss(rng.random((1, 3, 4, 4)), rng.random((1, 3, 4, 4)), np.zeros((1, 1, 4, 4))).item() == 0.0

  def test_shape_mismatch(self):
    with pytest.raises(DimensionError):
      reconstruction_loss(np.zeros((1, 3, 4, 4)), np.zeros((1, 3, 4, 5)), np.ones((1, 1, 4, 4)))

class TestTotalVariation:

  def test_vertical_step_edge(self):
    image = np.zeros((1, 1, 6, 8))
    image[..., 4:] = 1.0
    assert tv_loss(image).item() == pytest.approx(1.0 / 8)

  def test_constant_image(self):
    assert tv_loss(np.full((2, 3, 5, 5), 0.4)).item() == 0.0

class TestFeatureLosses:

  def test_extractor_is_frozen(self, extractor):
    assert extractor.num_taps == 5
    assert extractor.store.frozen
    assert all(not tensor.requires_grad for _, tensor in extractor.store.items())

  def test_tap_resolutions(self, extractor, rng):
    taps = extractor(rng.random((1, 3, 32, 32)))
    assert [ tap.shape[2] for tap in taps ] == [ 32, 16, 8, 4, 2 ]

  def test_from_config(self):
    extractor = FeatureExtractor.from_config(ExtractorConfig(extractor_channels=(2, 2, 2, 2, 2), extractor_seed=3))
    assert extractor.convs[0].weight.shape == (2, 3, 3, 3)

  def test_gram_is_symmetric(self, rng):
    g = gram(Tensor(rng.standard_normal((2, 4, 3, 5)))).data
    assert g.shape == (2, 4, 4)
    np.testing.assert_allclose(g, g.transpose(0, 2, 1))

  def test_identical_inputs(self, extractor, rng):
    image = rng.random((1, 3, 16, 16))
    mask = np.ones((1, 1, 16, 16))
    assert perceptual_loss(image, image, extractor).item() == 0.0
    assert style_loss(image, image, mask, extractor).item() == 0.0

  def test_different_inputs(self, extractor, rng):
    a, b = rng.random((1, 3, 16, 16)), rng.random((1, 3, 16, 16))
    assert perceptual_loss(a, b, extractor).item() > 0.0
    assert style_loss(a, b, np.ones((1, 1, 16, 16)), extractor).item() > 0.0

  def test_style_ignores_unmasked_pixels(self, extractor, rng):
    a, b = rng.random((1, 3, 16, 16)), rng.random((1, 3, 16, 16))
    mask = np.zeros((1, 1, 16, 16))
    mask[:, :, 4:12, 4:12] = 1.0
    b_inside = np.where(mask == 1.0, a, b)
    assert style_loss(a, b_inside, mask, extractor).item() == 0.0

  def test_perceptual_triangle_inequality(self, extractor):
    for seed in range(20):
      rng = np.random.default_rng(seed)
      a, b, c = (rng.random((1, 3, 16, 16)) for _ in range(3))
      ab, bc, ac = (perceptual_loss(x, y, extractor).item() for x, y in ((a, b), (b, c), (a, c)))
      assert ac <= ab + bc + 1e-12

  def test_gram_is_positive_semidefinite(self, extractor):
    for seed in range(20):
      rng = np.random.default_rng(seed)
      features = [ Tensor(rng.standard_normal((2, 6, 4, 4))), *extractor(rng.random((2, 3, 16, 16))) ]
      for tap in features:
        assert np.linalg.eigvalsh(gram(tap).data).min() >= -1e-6

  def test_style_is_a_per_sample_mean(self, extractor, rng):
    a, b = rng.random((1, 3, 16, 16)), rng.random((1, 3, 16, 16))
    mask = np.ones((1, 1, 16, 16))
    single = style_loss(a, b, mask, extractor).item()
    doubled = style_loss(np.concatenate([ a, a ]), np.concatenate([ b, b ]), np.ones((2, 1, 16, 16)), extractor)
    assert doubled.item() == pytest.approx(single)
