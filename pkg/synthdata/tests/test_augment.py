import json

import numpy as np
import pytest

from synthdata.augment import (AugmentationRecord, BackgroundSpec, ForegroundConfig, LayeredScene,
                               PlacementFailure, augment_pair, composite, gen_background,
                               gen_foreground, occlusion_fraction, replay_augmentation, shift_layer,
                               update_mask)
from synthdata.figures import FigureSpec, Garment, GarmentTexture, render_person
from synthdata.teachers import SyntheticTeacher


@pytest.fixture
def pair():
    """A rendered person, its re-dressed twin, subject alpha and try-on mask at 32px."""
    rng = np.random.default_rng(21)
    spec = FigureSpec.sample(rng, 32)
    rendering = render_person(spec, GarmentTexture.sample(rng))
    prime = SyntheticTeacher().try_on(rendering.person, rendering.pose, rendering.mask,
                                      Garment.from_texture(GarmentTexture.sample(rng), 32))
    return rendering.person, prime, rendering.alpha, rendering.mask


@pytest.mark.unit
def test_shift_layer_moves_and_zero_fills():
    layer = np.arange(16, dtype=float).reshape(4, 4)
    shifted = shift_layer(layer, (1, -1))
    assert shifted[1, 0] == layer[0, 1]
    assert (shifted[0] == 0).all()
    assert (shifted[:, 3] == 0).all()
    assert not shift_layer(layer, (4, 0)).any()


@pytest.mark.unit
def test_composite_without_foreground_is_subject_over_background():
    """With a fully transparent foreground the scene is subject over background."""
    size = 8
    background = np.full((size, size, 3), 0.2)
    subject = np.full((size, size, 3), 0.8)
    alpha = np.zeros((size, size))
    alpha[2:6, 2:6] = 1.0
    scene = LayeredScene(background, subject, alpha, np.ones((size, size, 3)), np.zeros((size, size)))
    out = composite(scene)
    assert np.allclose(out[3, 3], 0.8)
    assert np.allclose(out[0, 0], 0.2)


@pytest.mark.unit
def test_composite_foreground_on_top():
    size = 4
    fg_alpha = np.zeros((size, size))
    fg_alpha[0, 0] = 1.0
    scene = LayeredScene(np.zeros((size, size, 3)), np.full((size, size, 3), 0.5), np.ones((size, size)),
                         np.ones((size, size, 3)), fg_alpha)
    out = composite(scene)
    assert np.allclose(out[0, 0], 1.0)
    assert np.allclose(out[1, 1], 0.5)


@pytest.mark.unit
def test_layer_resolution_mismatch_rejected():
    scene = LayeredScene(np.zeros((4, 4, 3)), np.zeros((4, 4, 3)), np.zeros((4, 4)),
                         np.zeros((5, 5, 3)), np.zeros((5, 5)))
    with pytest.raises(ValueError):
        composite(scene)


@pytest.mark.unit
def test_update_mask_clears_any_occluded_pixel():
    """Any positive foreground alpha makes the pixel non-try-on."""
    mask = np.ones((3, 3))
    alpha = np.zeros((3, 3))
    alpha[1, 1] = 0.01
    updated = update_mask(mask, alpha)
    assert updated[1, 1] == 0
    assert updated.sum() == 8


@pytest.mark.unit
def test_checker_background_alternates_along_rows():
    """Opposite ends of the first row fall on different checker cells."""
    spec = BackgroundSpec('checker', ((255, 0, 0), (0, 0, 255)), cells=2)
    image = gen_background(None, spec, 8)
    assert np.allclose(image[0, 0], [1, 0, 0])
    assert np.allclose(image[0, 7], [0, 0, 1])


@pytest.mark.unit
def test_noise_background_is_reproducible_from_spec():
    spec = BackgroundSpec('noise', ((0, 0, 0), (0, 0, 0)), cells=4, noise_seed=5)
    assert np.array_equal(gen_background(None, spec, 16), gen_background(None, spec, 16))


@pytest.mark.unit
def test_unknown_background_family():
    with pytest.raises(ValueError):
        gen_background(None, BackgroundSpec('marble', ((0, 0, 0), (1, 1, 1))), 8)


@pytest.mark.unit
@pytest.mark.parametrize('kwargs', [
    {'rho_min': 0.5, 'rho_max': 0.1},
    {'rho_max': 1.5},
    {'opacity': 0.0},
    {'retries': 0},
])
def test_foreground_config_validation(kwargs):
    with pytest.raises(ValueError):
        ForegroundConfig(**kwargs)


@pytest.mark.unit
def test_zero_rho_max_gives_transparent_foreground():
    """rho_max = 0 disables occluders entirely."""
    mask = np.ones((16, 16))
    _, alpha, spec = gen_foreground(np.random.default_rng(0), ForegroundConfig(rho_max=0.0), mask)
    assert spec.shape == 'none'
    assert not alpha.any()


@pytest.mark.unit
def test_foreground_occlusion_within_bounds():
    mask = np.zeros((32, 32))
    mask[8:24, 8:24] = 1
    config = ForegroundConfig(rho_min=0.05, rho_max=0.3)
    rng = np.random.default_rng(1)
    for _ in range(5):
        _, alpha, _ = gen_foreground(rng, config, mask)
        assert 0.05 <= occlusion_fraction(mask, alpha) <= 0.3


@pytest.mark.unit
def test_unsatisfiable_occlusion_raises_placement_failure():
    """Bounds no occluder can meet exhaust the retry budget."""
    config = ForegroundConfig(rho_min=0.99, rho_max=1.0, retries=3)
    with pytest.raises(PlacementFailure):
        gen_foreground(np.random.default_rng(2), config, np.ones((32, 32)))


@pytest.mark.unit
def test_augmented_pair_still_differs_only_inside_mask(pair):
    """P and P' share background and occluder, so they agree outside the updated mask."""
    person, prime, alpha, mask = pair
    result = augment_pair(person, prime, alpha, mask, np.random.default_rng(3))
    outside = result.mask == 0
    assert np.array_equal(result.person[outside], result.person_prime[outside])
    assert (result.mask <= mask).all()
    assert result.record.occlusion == pytest.approx(occlusion_fraction(mask, result.occluder))


@pytest.mark.unit
def test_replay_reproduces_augmentation_from_json(pair):
    """The JSON record alone rebuilds the augmented pair."""
    person, prime, alpha, mask = pair
    original = augment_pair(person, prime, alpha, mask, np.random.default_rng(4))
    record = AugmentationRecord.from_dict(json.loads(json.dumps(original.record.to_dict())))
    replayed = replay_augmentation(record, person, prime, alpha, mask)
    assert np.array_equal(replayed.person, original.person)
    assert np.array_equal(replayed.person_prime, original.person_prime)
    assert np.array_equal(replayed.mask, original.mask)


@pytest.mark.unit
def test_augment_pair_rejects_mismatched_resolution(pair):
    person, prime, alpha, mask = pair
    with pytest.raises(ValueError):
        augment_pair(person, prime[:16, :16], alpha, mask, np.random.default_rng(0))


@pytest.mark.unit
def test_composite_hand_computed_pixel():
    """Background 0.2 under an opaque 0.8 subject under a half-transparent 0.5 foreground."""
    scene = LayeredScene(np.full((1, 1, 3), 0.2), np.full((1, 1, 3), 0.8), np.ones((1, 1)),
                         np.full((1, 1, 3), 0.5), np.full((1, 1), 0.5))
    assert np.allclose(composite(scene), 0.65)


@pytest.mark.unit
def test_occlusion_stays_below_rho_max_over_many_samples():
    config = ForegroundConfig(rho_max=0.4)
    rng = np.random.default_rng(8)
    placed = 0
    for _ in range(1000):
        rendering = render_person(FigureSpec.sample(rng, 16), GarmentTexture.sample(rng))
        try:
            _, alpha, _ = gen_foreground(rng, config, rendering.mask)
        except PlacementFailure:
            continue
        try_on = rendering.mask > 0
        covered = (try_on & (alpha > 0)).sum() / max(try_on.sum(), 1)
        assert covered <= 0.4
        assert not update_mask(rendering.mask, alpha)[alpha > 0].any()
        placed += 1
    assert placed >= 950
