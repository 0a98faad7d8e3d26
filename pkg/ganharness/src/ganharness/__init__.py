"""Toy-scale waveform GAN with recoverable binary latent codes.

Trains a WGAN-GP generator/discriminator pair plus an InfoGAN-style
Q-network on 1-second 16 kHz clips and exports generated audio for the
harmonium formant pipeline.
"""

__version__ = "0.1.0"
