import pytest
import torch

from ganharness.latent import sample_latent
from ganharness.models import (WAVEFORM_LEN, Discriminator, Generator,
                               QNetwork, _stage_channels)


@pytest.fixture(scope="module")
def nets():
    torch.manual_seed(0)
    return Generator(32), Discriminator(32), QNetwork(32)


class TestStageChannels:
    def test_halving_ladder(self):
        assert _stage_channels(32) == [32, 16, 8, 4, 2, 1]
        assert _stage_channels(64) == [64, 32, 16, 8, 4, 1]

    def test_too_narrow_rejected(self):
        with pytest.raises(ValueError, match="width"):
            _stage_channels(16)
        with pytest.raises(ValueError):
            _stage_channels(48)


class TestGenerator:
    def test_output_shape(self, nets):
        g, _, _ = nets
        z, phi = sample_latent(3, torch.Generator().manual_seed(1))
        assert g(z, phi).shape == (3, WAVEFORM_LEN)

    def test_output_range_untrained(self, nets):
        g, _, _ = nets
        z, phi = sample_latent(8, torch.Generator().manual_seed(2))
        with torch.no_grad():
            w = g(z, phi)
        assert float(w.min()) >= -1.0
        assert float(w.max()) <= 1.0

    def test_deterministic_given_code(self, nets):
        g, _, _ = nets
        z, phi = sample_latent(2, torch.Generator().manual_seed(3))
        with torch.no_grad():
            assert torch.equal(g(z, phi), g(z, phi))

    def test_fixed_seed_reproducible_weights(self):
        torch.manual_seed(7)
        a = Generator(32)
        torch.manual_seed(7)
        b = Generator(32)
        z, phi = sample_latent(2, torch.Generator().manual_seed(4))
        with torch.no_grad():
            assert torch.equal(a(z, phi), b(z, phi))

    def test_output_varies_with_code(self, nets):
        g, _, _ = nets
        gen = torch.Generator().manual_seed(5)
        z1, p1 = sample_latent(1, gen)
        z2, p2 = sample_latent(1, gen)
        with torch.no_grad():
            assert not torch.equal(g(z1, p1), g(z2, p2))


class TestCritics:
    def test_discriminator_scalar_per_sample(self, nets):
        _, d, _ = nets
        assert d(torch.zeros(5, WAVEFORM_LEN)).shape == (5,)

    def test_q_network_seven_logits(self, nets):
        _, _, q = nets
        assert q(torch.zeros(5, WAVEFORM_LEN)).shape == (5, 7)

    def test_wrong_length_rejected(self, nets):
        _, d, _ = nets
        with pytest.raises(ValueError, match="16384"):
            d(torch.zeros(2, 8000))
