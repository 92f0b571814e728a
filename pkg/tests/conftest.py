import numpy as np
import pytest
import torch

from moodkit.sampler import SamplerConfig
from moodkit.synth import SynthSpec, generate_corpus, generate_pair_set
from moodkit.training import TrainConfig


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """6 videos x 30 frames at 16 px, plus ground-truth sidecar."""
    root = tmp_path_factory.mktemp("tiny_corpus")
    spec = SynthSpec(num_videos=6, frames_per_video=30, image_size=16, noise=0.04, seed=13)
    sidecar = generate_corpus(spec, root)
    generate_pair_set(spec, root, num_pairs=40)
    return root, sidecar, spec


@pytest.fixture
def quick_train():
    return TrainConfig(epochs=2, batch_size=8, lr=1e-3, val_fraction=0.0, seed=5)


TINY_SAMPLER = SamplerConfig(temporal_length=20, stride=5, frames_per_clip=3)


def directional_grad_check(loss_fn, params, n_directions=60, h=1e-5, rtol=1e-4, seed=0):
    """Compare autograd directional derivatives against central finite
    differences along random unit directions in parameter space. Everything
    must already be float64."""
    loss = loss_fn()
    grads = torch.autograd.grad(loss, params)
    flat_grad = torch.cat([g.reshape(-1) for g in grads]).detach()

    def nudge(vector, scale):
        with torch.no_grad():
            offset = 0
            for p in params:
                count = p.numel()
                p.add_(scale * vector[offset:offset + count].reshape(p.shape))
                offset += count

    generator = torch.Generator().manual_seed(seed)
    worst = 0.0
    for _ in range(n_directions):
        direction = torch.randn(flat_grad.shape, generator=generator, dtype=torch.float64)
        direction /= direction.norm()
        nudge(direction, h)
        loss_plus = float(loss_fn().detach())
        nudge(direction, -2 * h)
        loss_minus = float(loss_fn().detach())
        nudge(direction, h)
        fd = (loss_plus - loss_minus) / (2 * h)
        analytic = float(flat_grad @ direction)
        rel = abs(fd - analytic) / max(abs(fd), abs(analytic), 1e-10)
        worst = max(worst, rel)
        assert rel < rtol, f"direction failed: analytic {analytic} vs fd {fd} (rel {rel:.3e})"
    return worst


def seeded_images(rng_seed, n, size, channels=3):
    rng = np.random.default_rng(rng_seed)
    return torch.from_numpy(rng.uniform(0, 1, size=(n, channels, size, size)).astype(np.float32))
