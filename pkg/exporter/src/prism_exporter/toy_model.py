"""Built-in deterministic frozen multimodal model.

A miniature vision-language stack (patch-embedding ViT encoder, linear
projector, byte-level transformer language stack) with seeded random
frozen weights. It runs image+instruction batches on CPU in a few
milliseconds per sample and is fully reproducible, which makes it the
default backend for tests and offline environments where no pretrained
checkpoint can be fetched. Real checkpoints can be registered alongside
it via ``MODEL_BUILDERS``.

Every sample in a batch is processed with a fixed sequence length
(visual tokens plus a padded instruction window), so a sample's feature
row never depends on what else shares its batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .errors import ConfigError

IMAGE_SIZE = 64
PATCH = 8
N_VISUAL_TOKENS = (IMAGE_SIZE // PATCH) ** 2
INSTRUCTION_TOKENS = 24
VOCAB = 256  # raw bytes


class _Attention(nn.Module):
    def __init__(self, width: int, heads: int):
        super().__init__()
        self.heads = heads
        self.head_dim = width // heads
        self.qkv = nn.Linear(width, 3 * width)
        self.out = nn.Linear(width, width)

    def forward(self, x):
        b, t, w = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)

        def split(z):
            return z.view(b, t, self.heads, self.head_dim).transpose(1, 2)

        q, k, v = split(q), split(k), split(v)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        mixed = scores.softmax(dim=-1) @ v
        return self.out(mixed.transpose(1, 2).reshape(b, t, w))


class _Block(nn.Module):
    """Pre-norm transformer block, bidirectional, no dropout."""

    def __init__(self, width: int, heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(width)
        self.attn = _Attention(width, heads)
        self.ln2 = nn.LayerNorm(width)
        self.mlp = nn.Sequential(
            nn.Linear(width, 4 * width), nn.GELU(), nn.Linear(4 * width, width)
        )

    def forward(self, x):
        x = x + self.attn(self.ln1(x))
        return x + self.mlp(self.ln2(x))


class ToyMultimodalModel(nn.Module):
    """Vision encoder -> projector -> language stack with exposed layers."""

    def __init__(self, vision_width=48, lang_width=64, vision_depth=2, lang_depth=4):
        super().__init__()
        self.lang_depth = lang_depth
        self.feature_dim = lang_width
        self.patch_embed = nn.Conv2d(3, vision_width, kernel_size=PATCH, stride=PATCH)
        self.vision_pos = nn.Parameter(torch.zeros(N_VISUAL_TOKENS, vision_width))
        self.vision_blocks = nn.ModuleList(
            _Block(vision_width, heads=4) for _ in range(vision_depth)
        )
        self.vision_ln = nn.LayerNorm(vision_width)
        self.projector = nn.Linear(vision_width, lang_width)
        self.token_embed = nn.Embedding(VOCAB, lang_width)
        self.lang_pos = nn.Parameter(
            torch.zeros(N_VISUAL_TOKENS + INSTRUCTION_TOKENS, lang_width)
        )
        self.lang_blocks = nn.ModuleList(
            _Block(lang_width, heads=4) for _ in range(lang_depth)
        )

    def encode_image(self, images):
        tokens = self.patch_embed(images).flatten(2).transpose(1, 2)
        tokens = tokens + self.vision_pos
        for block in self.vision_blocks:
            tokens = block(tokens)
        return self.vision_ln(tokens)

    def forward(self, images, instruction_ids):
        """Hidden states per language layer.

        Returns a list of ``lang_depth + 1`` tensors of shape
        (batch, N_VISUAL_TOKENS + INSTRUCTION_TOKENS, feature_dim); index
        0 is the embedding output, index l the output of block l.
        """
        visual = self.projector(self.encode_image(images))
        text = self.token_embed(instruction_ids)
        seq = torch.cat([visual, text], dim=1) + self.lang_pos
        states = [seq]
        for block in self.lang_blocks:
            seq = block(seq)
            states.append(seq)
        return states


def _init_frozen(model: nn.Module, seed: int) -> nn.Module:
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for name, param in model.named_parameters():
            if name.endswith(".bias"):
                param.normal_(0.0, 0.02, generator=gen)
            elif "ln" in name or "LayerNorm" in name:
                param.fill_(1.0)
            elif "pos" in name:
                param.normal_(0.0, 0.5, generator=gen)
            else:
                param.normal_(0.0, 0.08, generator=gen)
    model.eval()
    model.requires_grad_(False)
    return model


def _build_toy_mm_64() -> ToyMultimodalModel:
    return _init_frozen(ToyMultimodalModel(), seed=0x70F0)


MODEL_BUILDERS = {
    "toy-mm-64": _build_toy_mm_64,
}


@dataclass(frozen=True)
class ResolvedModel:
    model_id: str
    model: ToyMultimodalModel

    @property
    def depth(self) -> int:
        return self.model.lang_depth

    @property
    def feature_dim(self) -> int:
        return self.model.feature_dim


def resolve_model(model_id: str) -> ResolvedModel:
    builder = MODEL_BUILDERS.get(model_id)
    if builder is None:
        raise ConfigError(
            f"cannot resolve model {model_id!r}; available: "
            f"{', '.join(sorted(MODEL_BUILDERS))}"
        )
    return ResolvedModel(model_id=model_id, model=builder())


def encode_instruction(text: str) -> torch.Tensor:
    """Fixed-width byte tokenization: truncate or zero-pad to 24 tokens."""
    raw = text.encode("utf-8")[:INSTRUCTION_TOKENS]
    padded = raw + b"\x00" * (INSTRUCTION_TOKENS - len(raw))
    return torch.tensor(list(padded), dtype=torch.long)
