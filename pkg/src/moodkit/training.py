"""Shared seeded training engine used by every trainer in the toolkit.

One logical optimization sequence: Adam, base learning rate decayed by a
fixed factor on a fixed epoch schedule, seeded shuffling through the global
torch generator. Two runs with the same seed and config produce bit-identical
parameter trajectories on the same machine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import torch

from .errors import ConfigurationError


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 128
    lr: float = 1e-4
    lr_decay_factor: float = 0.1
    lr_decay_every: int = 10
    val_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs and batch_size must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigurationError(f"val_fraction must be in [0, 1), got {self.val_fraction}")
        if self.lr_decay_every < 1:
            raise ConfigurationError("lr_decay_every must be >= 1")


def seed_everything(seed: int) -> None:
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True)


def chunk_indices(perm: torch.Tensor, batch_size: int) -> list[torch.Tensor]:
    """Split a permutation into batches; a trailing singleton is folded into
    the previous batch so BatchNorm always sees >= 2 samples."""
    chunks = list(torch.split(perm, batch_size))
    if len(chunks) > 1 and chunks[-1].numel() == 1:
        chunks[-2:] = [torch.cat(chunks[-2:])]
    return chunks


def holdout_split(n: int, val_fraction: float) -> tuple[torch.Tensor, torch.Tensor]:
    """Seeded random train/holdout index split (consumes the global generator)."""
    perm = torch.randperm(n)
    n_val = int(round(n * val_fraction))
    if val_fraction > 0:
        n_val = max(1, min(n - 1, n_val))
    return perm[n_val:], perm[:n_val]


def train_loop(model: torch.nn.Module,
               tensors: Sequence[torch.Tensor],
               config: TrainConfig,
               batch_loss: Callable[[torch.nn.Module, list[torch.Tensor]], torch.Tensor],
               on_epoch: Callable[[torch.nn.Module, int], dict] | None = None) -> list[dict]:
    """Run the optimization sequence; returns per-epoch history entries."""
    n = tensors[0].shape[0]
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    history = []
    for epoch in range(config.epochs):
        lr = config.lr * config.lr_decay_factor ** (epoch // config.lr_decay_every)
        for group in optimizer.param_groups:
            group["lr"] = lr
        model.train()
        total = 0.0
        for idx in chunk_indices(torch.randperm(n), config.batch_size):
            optimizer.zero_grad()
            loss = batch_loss(model, [t[idx] for t in tensors])
            loss.backward()
            optimizer.step()
            total += loss.item() * idx.numel()
        entry = {"epoch": epoch, "lr": lr, "train_loss": total / n}
        if on_epoch is not None:
            entry.update(on_epoch(model, epoch))
        history.append(entry)
    return history


@torch.no_grad()
def predict_logits(model: torch.nn.Module, x: torch.Tensor, batch_size: int = 256,
                   forward: Callable[[torch.Tensor], torch.Tensor] | None = None) -> torch.Tensor:
    """Inference-mode forward in batches (stored normalization statistics).
    ``forward`` selects an alternative head of the module when given."""
    model.eval()
    fn = model if forward is None else forward
    outs = [fn(x[i:i + batch_size]) for i in range(0, x.shape[0], batch_size)]
    return torch.cat(outs)
