import numpy as np
import pytest

from synthdata.figures import (PART_INDEX, FigureSpec, Garment, GarmentTexture, _polygon_mask,
                               catalog_image, part_labels, render_person, render_texture)


def _on_8bit_grid(image):
    return np.allclose(image * 255.0, np.round(image * 255.0))


@pytest.mark.unit
def test_texture_colours_survive_png_quantisation():
    """Rendered textures only use 8-bit representable values."""
    rng = np.random.default_rng(0)
    for _ in range(10):
        texture = GarmentTexture.sample(rng)
        assert _on_8bit_grid(render_texture(texture, 32))


@pytest.mark.unit
def test_texture_dict_restores_equal_texture():
    """A texture read back from its dict compares equal."""
    texture = GarmentTexture.sample(np.random.default_rng(3))
    assert GarmentTexture.from_dict(texture.to_dict()) == texture


@pytest.mark.unit
def test_unknown_texture_kind_rejected():
    """Unknown texture kinds raise ValueError."""
    with pytest.raises(ValueError):
        render_texture(GarmentTexture('plaid', (0, 0, 0), (255, 255, 255)), 8)


@pytest.mark.unit
def test_solid_texture_is_uniform():
    texture = GarmentTexture('solid', (10, 20, 30), (200, 200, 200))
    image = render_texture(texture, 8)
    assert np.allclose(image, np.array([10, 20, 30]) / 255.0)


@pytest.mark.unit
def test_catalog_image_has_white_corners():
    """Catalog images place the garment on a white canvas."""
    texture = GarmentTexture('solid', (0, 0, 255), (0, 0, 255))
    image = catalog_image(texture, 32)
    assert np.allclose(image[0, 0], 1.0)
    assert np.allclose(image[16, 16], [0.0, 0.0, 1.0])
    assert Garment.from_texture(texture, 32).image.shape == (32, 32, 3)


@pytest.mark.unit
def test_mask_lies_inside_torso_and_is_binary():
    """The try-on mask covers torso pixels only."""
    rng = np.random.default_rng(1)
    spec = FigureSpec.sample(rng, 64)
    rendering = render_person(spec, GarmentTexture.sample(rng))
    labels = part_labels(spec)
    assert set(np.unique(rendering.mask)) <= {0.0, 1.0}
    assert rendering.mask.sum() > 0
    assert (labels[rendering.mask > 0] == PART_INDEX['torso']).all()


@pytest.mark.unit
def test_person_is_black_outside_subject():
    rng = np.random.default_rng(2)
    spec = FigureSpec.sample(rng, 32)
    rendering = render_person(spec, GarmentTexture.sample(rng))
    assert (rendering.person[rendering.alpha == 0] == 0).all()
    assert set(np.unique(rendering.alpha)) <= {0.0, 1.0}


@pytest.mark.unit
def test_pose_map_is_zero_on_background_and_quantised():
    rng = np.random.default_rng(4)
    spec = FigureSpec.sample(rng, 32)
    rendering = render_person(spec, GarmentTexture.sample(rng))
    assert (rendering.pose[rendering.alpha == 0] == 0).all()
    assert _on_8bit_grid(rendering.pose)
    torso = part_labels(spec) == PART_INDEX['torso']
    assert np.allclose(rendering.pose[torso, 0], PART_INDEX['torso'] / 7, atol=1 / 255)


@pytest.mark.unit
def test_garment_region_shows_texture():
    """Pixels inside the mask carry the garment texture."""
    rng = np.random.default_rng(5)
    spec = FigureSpec.sample(rng, 32)
    texture = GarmentTexture('solid', (255, 0, 0), (255, 0, 0))
    rendering = render_person(spec, texture)
    assert np.allclose(rendering.person[rendering.mask > 0], [1.0, 0.0, 0.0])


@pytest.mark.unit
def test_two_piece_bottom_mask_is_disjoint_from_top():
    """Two-piece figures carry a separate bottom mask on the hips."""
    rng = np.random.default_rng(6)
    spec = FigureSpec.sample(rng, 64, two_piece=True)
    rendering = render_person(spec, GarmentTexture.sample(rng), GarmentTexture.sample(rng))
    assert rendering.bottom_mask is not None
    assert rendering.bottom_mask.sum() > 0
    assert not ((rendering.bottom_mask > 0) & (rendering.mask > 0)).any()


@pytest.mark.unit
def test_single_piece_has_no_bottom_mask():
    rng = np.random.default_rng(6)
    spec = FigureSpec.sample(rng, 32)
    assert render_person(spec, GarmentTexture.sample(rng)).bottom_mask is None


@pytest.mark.unit
def test_degenerate_polygon_rejected():
    """A polygon with fewer than three distinct vertices raises ValueError."""
    with pytest.raises(ValueError):
        _polygon_mask(((0.5, 0.5), (0.5, 0.5), (0.6, 0.6)), 16)


@pytest.mark.unit
def test_same_seed_same_figure():
    first = FigureSpec.sample(np.random.default_rng(9), 32)
    second = FigureSpec.sample(np.random.default_rng(9), 32)
    assert first == second
