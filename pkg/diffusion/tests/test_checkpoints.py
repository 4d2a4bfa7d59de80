import json
import shutil

import pytest

from diffusion.checkpoints import (MANIFEST_NAME, CheckpointError, CheckpointNotFound,
                                   checkpoint_dir, latest_checkpoint, list_checkpoints,
                                   load_checkpoint)
from diffusion.garment_encoder import parameter_hash
from diffusion.unet import BLOCK_ORDER, CHANNEL_LAYOUT


@pytest.mark.unit
def test_checkpoints_written_every_interval(trained_run):
    """A four-step run checkpointing every two steps keeps steps 2 and 4."""
    assert [p.name for p in list_checkpoints(trained_run.run_dir)] == ['step-000002', 'step-000004']
    assert latest_checkpoint(trained_run.run_dir) == checkpoint_dir(trained_run.run_dir, 4)


@pytest.mark.unit
def test_load_checkpoint_restores_sections(trained_run):
    loaded = load_checkpoint(trained_run.run_dir)
    assert loaded.step == 4
    assert loaded.config.arm == 'wild_aug+ar'
    assert parameter_hash(loaded.encoder) == trained_run.encoder_hash
    assert loaded.manifest['channel_layout'] == list(CHANNEL_LAYOUT)
    assert loaded.manifest['block_order'] == list(BLOCK_ORDER)
    assert not any(p.requires_grad for p in loaded.encoder.parameters())


@pytest.mark.unit
def test_encoder_identical_across_checkpoints(trained_run):
    """The garment encoder never changes during U-Net training."""
    hashes = {json.loads((p / MANIFEST_NAME).read_text())['hashes']['garment_encoder']
              for p in list_checkpoints(trained_run.run_dir)}
    assert hashes == {trained_run.encoder_hash}


@pytest.mark.unit
def test_tampered_hash_rejected(trained_run, tmp_path):
    copy = tmp_path / 'ckpt'
    shutil.copytree(checkpoint_dir(trained_run.run_dir, 4), copy)
    manifest = json.loads((copy / MANIFEST_NAME).read_text())
    manifest['hashes']['tryon_unet'] = '0' * 64
    (copy / MANIFEST_NAME).write_text(json.dumps(manifest))
    with pytest.raises(CheckpointError):
        load_checkpoint(copy)


@pytest.mark.unit
def test_reordered_channel_layout_rejected(trained_run, tmp_path):
    copy = tmp_path / 'ckpt'
    shutil.copytree(checkpoint_dir(trained_run.run_dir, 2), copy)
    manifest = json.loads((copy / MANIFEST_NAME).read_text())
    manifest['channel_layout'] = list(reversed(manifest['channel_layout']))
    (copy / MANIFEST_NAME).write_text(json.dumps(manifest))
    with pytest.raises(CheckpointError):
        load_checkpoint(copy)


@pytest.mark.unit
def test_missing_section_and_missing_checkpoint(trained_run, tmp_path):
    copy = tmp_path / 'ckpt'
    shutil.copytree(checkpoint_dir(trained_run.run_dir, 2), copy)
    (copy / 'garment_encoder.pt').unlink()
    with pytest.raises(CheckpointNotFound):
        load_checkpoint(copy)
    with pytest.raises(CheckpointNotFound):
        load_checkpoint(tmp_path / 'nothing-here')
    with pytest.raises(CheckpointNotFound):
        latest_checkpoint(tmp_path)
