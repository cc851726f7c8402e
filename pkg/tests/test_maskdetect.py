import numpy as np
import pytest

from blindpaint.errors import ContractError, DimensionError
from blindpaint.frequency import luma
from blindpaint.maskdetect import (
  Detector, DetectorConfig, EncoderLayer, FrequencyAttention, PatchEmbedding, detection_loss, detection_terms,
  dual_attention, edge_features, from_patches, merge_heads, neighbor_counts, patch_similarity, self_attention,
  split_heads, to_patches,
)
from blindpaint.tensor import Linear, ParamStore, Tensor, ops

# =============================================================================
# Patches and heads
# =============================================================================

class TestPatches:

  def test_patch_round_trip(self, rng):
    x = rng.random((2, 3, 16, 16))
    tokens = to_patches(x, 4)
    assert tokens.shape == (2, 16, 16, 3)
    np.testing.assert_array_equal(from_patches(tokens, 4, (4, 4)).data, x)

  def test_patch_holds_its_pixels(self, rng):
    x = rng.random((1, 2, 8, 8))
    tokens = to_patches(x, 2).data
    # Patch 1 is the top-right quadrant, pixels in row-major order
    np.testing.assert_array_equal(tokens[0, 1, :, 0], x[0, 0, :4, 4:].ravel())

  def test_split_merge_round_trip(self, rng):
    tokens = rng.random((2, 5, 3, 8))
    split = split_heads(Tensor(tokens), 4)
    assert split.shape == (2, 4, 5, 6)
    np.testing.assert_array_equal(merge_heads(split, tokens.shape).data, tokens)

  def test_heads_must_divide_channels(self):
    with pytest.raises(DimensionError):
      split_heads(Tensor(np.zeros((1, 2, 2, 6))), 4)

  def test_embedding_needs_divisible_sides(self):
    store = ParamStore()
    embedding = PatchEmbedding(store, 'embed', 3, 4, grid=8)
    with pytest.raises(DimensionError) as info:
      embedding(np.zeros((1, 3, 32, 36)))
    assert info.value.axis == 3

  def test_embedding_layout(self, rng):
    store = ParamStore()
    seq = PatchEmbedding(store, 'embed', 3, 4, grid=4)(rng.random((2, 3, 16, 16)))
    assert seq.tokens.shape == (2, 16, 16, 4)
    assert seq.num_patches == 16 and seq.dim == 64
    assert seq.embeddings().shape == (2, 16, 64)
    assert seq.position_encoding.shape == (16, 64)

# =============================================================================
# Attention
# =============================================================================

class TestAttention:

  def test_self_attention_by_hand(self):
    tokens = Tensor(np.array([ 1.0, 0.0 ]).reshape(1, 2, 1, 1))
    weights = self_attention(tokens, lambda t: t, lambda t: t, heads=1).data[0, 0]
    np.testing.assert_allclose(weights[0], [ 0.7311, 0.2689 ], atol=1e-4)
    np.testing.assert_allclose(weights[1], [ 0.5, 0.5 ])

  def test_self_attention_zero_scores_are_uniform(self):
    tokens = Tensor(np.zeros((2, 5, 3, 4)))
    weights = self_attention(tokens, lambda t: t, lambda t: t, heads=2)
    assert weights.shape == (2, 2, 5, 5)
    np.testing.assert_allclose(weights.data, 0.2)

  def test_self_attention_rows_are_distributions(self):
    for seed in range(100):
      rng = np.random.default_rng(seed)
      store = ParamStore(seed)
      query, key = Linear(store, 'query', 4, 4), Linear(store, 'key', 4, 4)
      weights = self_attention(Tensor(rng.standard_normal((1, 6, 3, 4)) * 3), query, key, heads=2).data
      assert np.all(weights >= 0.0)
      np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-12)

  def test_dual_attention_rows_sum_to_one(self):
    for seed in range(100):
      rng = np.random.default_rng(seed)
      store = ParamStore(seed)
      layer = EncoderLayer(store, 'layer', channels=4, heads=2, mlp_hidden=8, frequency_channels=2)
      tokens = Tensor(rng.standard_normal((1, 6, 3, 4)) * 3)
      maps = Tensor(rng.standard_normal((1, 2, 6, 6)) * 3)
      _, weights = layer(tokens, maps)
      assert weights.shape == (1, 2, 6, 6)
      assert np.all(weights.data >= 0.0)
      np.testing.assert_allclose(weights.data.sum(axis=-1), 1.0, atol=1e-12)

  def test_without_frequency_rows_are_renormalized(self, rng):
    raw = rng.random((1, 2, 4, 4))
    out = dual_attention(Tensor(raw), None, None).data
    np.testing.assert_allclose(out, raw / raw.sum(axis=-1, keepdims=True))

  def test_frequency_maps_are_pairwise(self, rng):
    store = ParamStore(1)
    module = FrequencyAttention(store, 'freq', grid=4, channels=2, tower=(4,))
    frequency = rng.standard_normal((2, 1, 16, 16))
    assert module(frequency).shape == (2, 2, 16, 16)

  def test_frequency_maps_follow_patch_order(self, rng):
    store = ParamStore(1)
    module = FrequencyAttention(store, 'freq', grid=2, channels=1, tower=(4,))
    frequency = rng.standard_normal((1, 1, 8, 8))
    swapped = frequency.copy()
    swapped[:, :, :4, :4], swapped[:, :, :4, 4:] = frequency[:, :, :4, 4:], frequency[:, :, :4, :4]
    maps = module(frequency).data[0, 0]
    order = [ 1, 0, 2, 3 ]
    np.testing.assert_allclose(module(swapped).data[0, 0], maps[np.ix_(order, order)], atol=1e-12)

# =============================================================================
# Patch similarity
# =============================================================================

class TestPatchSimilarity:

  def test_neighbor_counts(self):
    counts = neighbor_counts(4, 5)
    assert counts[0, 0] == 4 and counts[0, 2] == 6 and counts[2, 2] == 9

  def test_constant_features_give_ones(self):
    features = np.ones((2, 3, 4, 5)) * np.array([ 1.0, -2.0, 0.5 ])[None, :, None, None]
    np.testing.assert_allclose(patch_similarity(features).data, 1.0, atol=1e-12)

  def test_zero_features_give_zeros(self):
    np.testing.assert_array_equal(patch_similarity(np.zeros((1, 3, 4, 4))).data, 0.0)

  def test_edge_drops_at_a_boundary(self):
    features = np.zeros((1, 2, 6, 6))
    features[:, 0, :, :3] = 1.0
    features[:, 1, :, 3:] = 1.0
    edge = patch_similarity(features).data[0]
    assert edge[3, 0] == pytest.approx(1.0)
    assert edge[3, 2] == pytest.approx(6 / 9)

  def test_too_small(self):
    with pytest.raises(DimensionError):
      patch_similarity(np.ones((1, 3, 2, 8)))

  def test_edge_features_broadcast(self, rng):
    features = rng.random((1, 3, 4, 4))
    edge = rng.random((1, 4, 4))
    out = edge_features(features, Tensor(edge)).data
    np.testing.assert_allclose(out - features, np.broadcast_to(edge[:, None], features.shape))

# =============================================================================
# Detection loss
# =============================================================================

class TestDetectionLoss:

  def test_half_overlap_dice(self):
    pred = np.zeros((1, 4, 8))
    pred[:, :, :4] = 1.0
    gt = np.zeros((1, 4, 8))
    gt[:, :, 2:6] = 1.0
    _, dice = detection_terms(pred, gt)
    assert dice.item() == pytest.approx(0.5, abs=1e-4)

  def test_perfect_prediction_is_near_zero(self):
    gt = np.zeros((2, 4, 4))
    gt[:, 1:3, 1:3] = 1.0
    assert detection_loss(gt, gt).item() < 1e-4

  def test_non_binary_target(self):
    with pytest.raises(ContractError):
      detection_loss(np.full((1, 2, 2), 0.5), np.full((1, 2, 2), 0.5))

  def test_shape_mismatch(self):
    with pytest.raises(DimensionError):
      detection_loss(np.full((1, 2, 2), 0.5), np.zeros((1, 2, 3)))

  def test_extreme_probabilities_stay_finite(self):
    gt = np.array([ [ [ 1.0, 0.0 ] ] ])
    assert np.isfinite(detection_loss(ops.sigmoid(np.array([ [ [ -800.0, 800.0 ] ] ])), gt).item())

# =============================================================================
# Detector
# =============================================================================

class TestDetector:

  def test_output_shapes(self, rng, tiny_configs):
    detector = Detector(ParamStore(0), tiny_configs.detector)
    out = detector(rng.random((2, 3, 32, 32)))
    assert out.mask_logits.shape == (2, 32, 32)
    assert out.mask_prob.shape == (2, 32, 32)
    assert out.edge_map.shape == (2, 4, 4)
    assert out.feature_map.shape == (2, 8, 4, 4)
    assert out.frequency.shape == (2, 1, 32, 32)
    assert len(out.attention) == 1 and out.attention[0].shape == (2, 2, 64, 64)
    assert np.all((out.mask_prob.data > 0.0) & (out.mask_prob.data < 1.0))
    assert set(np.unique(out.binarize())) <= { 0.0, 1.0 }

  def test_ablations(self, rng, tiny_configs):
    images = rng.random((1, 3, 32, 32))
    cfg = DetectorConfig(**{ **tiny_configs.detector.__dict__, 'use_dual': False, 'use_ps': False })
    store = ParamStore(0)
    out = Detector(store, cfg)(images)
    assert out.edge_map is None
    assert not any(name.startswith('freq.') or '.fuse.' in name for name in store.tensors)
    np.testing.assert_allclose(out.attention[0].data.sum(axis=-1), 1.0, atol=1e-12)

  def test_plain_attention_changes_the_mask(self, rng, tiny_configs):
    images = rng.random((1, 3, 32, 32))
    full = Detector(ParamStore(3), tiny_configs.detector)(images)
    cfg = DetectorConfig(**{ **tiny_configs.detector.__dict__, 'use_dual': False })
    plain = Detector(ParamStore(3), cfg)(images)
    assert not np.allclose(full.mask_prob.data, plain.mask_prob.data)

  def test_without_filter_reads_luma(self, rng, tiny_configs):
    images = rng.random((1, 3, 32, 32))
    full = Detector(ParamStore(3), tiny_configs.detector)(images)
    cfg = DetectorConfig(**{ **tiny_configs.detector.__dict__, 'use_fad': False })
    store = ParamStore(3)
    out = Detector(store, cfg)(images)
    assert any(name.startswith('freq.') for name in store.tensors)
    np.testing.assert_allclose(out.frequency[0, 0], luma(images[0].transpose(1, 2, 0)))
    assert not np.allclose(full.mask_prob.data, out.mask_prob.data)

  def test_same_seed_same_output(self, rng, tiny_configs):
    images = rng.random((1, 3, 32, 32))
    a = Detector(ParamStore(5), tiny_configs.detector)(images)
    b = Detector(ParamStore(5), tiny_configs.detector)(images)
    np.testing.assert_array_equal(a.mask_logits.data, b.mask_logits.data)

  def test_rejects_indivisible_images(self, tiny_configs):
    with pytest.raises(DimensionError):
      Detector(ParamStore(0), tiny_configs.detector)(np.zeros((1, 3, 36, 36)))
