"""WGAN-GP training loop with an auxiliary code-recovery (Q) objective.

Per step: `critic_steps` discriminator updates with gradient penalty,
then one joint generator/Q update where the Q-network's binary
cross-entropy on recovered phi codes backpropagates into both networks.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from torch import nn

from .data import sample_batch
from .latent import sample_latent
from .models import Discriminator, Generator, QNetwork

log = logging.getLogger(__name__)

_OPTIMIZERS = {"adam": torch.optim.Adam, "rmsprop": torch.optim.RMSprop}


@dataclass(frozen=True)
class TrainerConfig:
    learning_rate: float = 1e-4
    batch_size: int = 64
    g_optimizer: str = "adam"
    d_optimizer: str = "adam"
    q_optimizer: str = "rmsprop"
    gp_weight: float = 10.0
    critic_steps: int = 5
    steps: int = 2000
    checkpoint_interval: int = 500
    sample_count: int = 100
    width: int = 64
    encoding: str = "binary"
    seed: int = 0

    def __post_init__(self):
        for name in ("learning_rate", "batch_size", "gp_weight",
                     "critic_steps", "steps", "checkpoint_interval",
                     "sample_count", "width"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("g_optimizer", "d_optimizer", "q_optimizer"):
            if getattr(self, name) not in _OPTIMIZERS:
                raise ValueError(f"{name} must be one of {sorted(_OPTIMIZERS)}")


@dataclass
class LossRecord:
    step: int
    wasserstein: float   # E[D(real)] - E[D(fake)]
    gradient_penalty: float
    q_loss: float


@dataclass
class Trainer:
    config: TrainerConfig = field(default_factory=TrainerConfig)

    def __post_init__(self):
        torch.manual_seed(self.config.seed)
        self.generator = Generator(self.config.width)
        self.discriminator = Discriminator(self.config.width)
        self.q_network = QNetwork(self.config.width)
        lr = self.config.learning_rate
        self.opt_g = _OPTIMIZERS[self.config.g_optimizer](
            self.generator.parameters(), lr=lr)
        self.opt_d = _OPTIMIZERS[self.config.d_optimizer](
            self.discriminator.parameters(), lr=lr)
        self.opt_q = _OPTIMIZERS[self.config.q_optimizer](
            self.q_network.parameters(), lr=lr)
        self.rng = torch.Generator().manual_seed(self.config.seed)
        self.step = 0
        self._bce = nn.BCEWithLogitsLoss()

    # -- pieces ----------------------------------------------------------

    def _gradient_penalty(self, real: torch.Tensor,
                          fake: torch.Tensor) -> torch.Tensor:
        eps = torch.rand(real.shape[0], 1, generator=self.rng)
        mixed = (eps * real + (1.0 - eps) * fake).requires_grad_(True)
        scores = self.discriminator(mixed)
        grads, = torch.autograd.grad(scores.sum(), mixed, create_graph=True)
        norms = grads.norm(2, dim=1)
        return ((norms - 1.0) ** 2).mean()

    def _critic_update(self, real: torch.Tensor):
        z, phi = sample_latent(real.shape[0], self.rng,
                               encoding=self.config.encoding)
        with torch.no_grad():
            fake = self.generator(z, phi)
        d_real = self.discriminator(real).mean()
        d_fake = self.discriminator(fake).mean()
        gp = self._gradient_penalty(real, fake)
        loss = d_fake - d_real + self.config.gp_weight * gp
        self.opt_d.zero_grad(set_to_none=True)
        loss.backward()
        self.opt_d.step()
        return float((d_real - d_fake).detach()), float(gp.detach())

    def _generator_update(self, batch: int) -> float:
        z, phi = sample_latent(batch, self.rng, encoding=self.config.encoding)
        fake = self.generator(z, phi)
        g_loss = -self.discriminator(fake).mean()
        q_loss = self._bce(self.q_network(fake), phi)
        self.opt_g.zero_grad(set_to_none=True)
        self.opt_q.zero_grad(set_to_none=True)
        (g_loss + q_loss).backward()
        self.opt_g.step()
        self.opt_q.step()
        return float(q_loss.detach())

    # -- public API ------------------------------------------------------

    def train_step(self, real: torch.Tensor) -> LossRecord:
        """One full cycle: critic_steps discriminator updates, then one
        joint generator/Q update."""
        wasserstein = gp = 0.0
        for _ in range(self.config.critic_steps):
            wasserstein, gp = self._critic_update(real)
        q_loss = self._generator_update(real.shape[0])
        self.step += 1
        record = LossRecord(step=self.step, wasserstein=wasserstein,
                            gradient_penalty=gp, q_loss=q_loss)
        for name, value in (("wasserstein", wasserstein),
                            ("gradient_penalty", gp), ("q_loss", q_loss)):
            if not math.isfinite(value):
                raise RuntimeError(
                    f"non-finite {name} ({value}) at step {self.step}; "
                    f"last record: {record}")
        return record

    def train(self, corpus: torch.Tensor, steps: int | None = None,
              checkpoint_dir=None) -> list[LossRecord]:
        steps = self.config.steps if steps is None else steps
        history = []
        for _ in range(steps):
            real = sample_batch(corpus, self.config.batch_size, self.rng)
            record = self.train_step(real)
            history.append(record)
            if record.step % 100 == 0:
                log.info("step %d: W=%.4f gp=%.4f q=%.4f", record.step,
                         record.wasserstein, record.gradient_penalty,
                         record.q_loss)
            if checkpoint_dir and record.step % self.config.checkpoint_interval == 0:
                self.save_checkpoint(checkpoint_dir)
        return history

    def q_bit_accuracy(self, n_samples: int = 256) -> float:
        """Per-bit recovery accuracy of phi from freshly generated audio."""
        hits = total = 0
        with torch.no_grad():
            for lo in range(0, n_samples, 32):
                batch = min(32, n_samples - lo)
                z, phi = sample_latent(batch, self.rng,
                                       encoding=self.config.encoding)
                fake = self.generator(z, phi)
                predicted = (self.q_network(fake) > 0).float()
                hits += float((predicted == phi).sum())
                total += phi.numel()
        return hits / total

    def save_checkpoint(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "checkpoint.pt"
        torch.save({
            "step": self.step,
            "config": asdict(self.config),
            "generator": self.generator.state_dict(),
            "discriminator": self.discriminator.state_dict(),
            "q_network": self.q_network.state_dict(),
            "opt_g": self.opt_g.state_dict(),
            "opt_d": self.opt_d.state_dict(),
            "opt_q": self.opt_q.state_dict(),
        }, path)
        (directory / "config.json").write_text(
            json.dumps(asdict(self.config), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load_checkpoint(cls, directory) -> "Trainer":
        path = Path(directory) / "checkpoint.pt"
        if not path.exists():
            raise FileNotFoundError(f"no checkpoint at {path}")
        blob = torch.load(path, weights_only=True)
        trainer = cls(TrainerConfig(**blob["config"]))
        trainer.generator.load_state_dict(blob["generator"])
        trainer.discriminator.load_state_dict(blob["discriminator"])
        trainer.q_network.load_state_dict(blob["q_network"])
        trainer.opt_g.load_state_dict(blob["opt_g"])
        trainer.opt_d.load_state_dict(blob["opt_d"])
        trainer.opt_q.load_state_dict(blob["opt_q"])
        trainer.step = blob["step"]
        return trainer


def wasserstein_slope(history) -> float:
    """Least-squares slope of the Wasserstein estimate over steps."""
    if len(history) < 2:
        raise ValueError("need at least 2 records")
    steps = torch.tensor([float(r.step) for r in history])
    values = torch.tensor([r.wasserstein for r in history])
    steps = steps - steps.mean()
    return float((steps * (values - values.mean())).sum() / (steps * steps).sum())
