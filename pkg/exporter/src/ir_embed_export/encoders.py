"""Encoder wrappers. Every encoder maps a float tensor batch (B, 3, H, W) in
[0, 1] to one global embedding per image; normalization to unit L2 length
happens in the export layer so the downstream cosine distance is a pure
dot-product complement."""
from __future__ import annotations

import torch
from torch import nn

# Preprocessing pinned for reproducibility and recorded in the manifest meta.
RESIZE_TO = 256
CROP_TO = 224
NORM_MEAN = (0.485, 0.456, 0.406)
NORM_STD = (0.229, 0.224, 0.225)

_RANDOM_CNN_SEED = 0xE5C0DE
_RANDOM_CNN_DIM = 256


class EncoderError(RuntimeError):
    """Encoder weights could not be obtained or the model failed to load."""


def preprocess(batch: torch.Tensor) -> torch.Tensor:
    """Resize shorter side to 256, center-crop 224, channel-normalize."""
    b, c, h, w = batch.shape
    scale = RESIZE_TO / min(h, w)
    batch = torch.nn.functional.interpolate(
        batch, size=(round(h * scale), round(w * scale)),
        mode="bilinear", align_corners=False, antialias=True)
    _, _, h, w = batch.shape
    top = (h - CROP_TO) // 2
    left = (w - CROP_TO) // 2
    batch = batch[:, :, top:top + CROP_TO, left:left + CROP_TO]
    mean = torch.tensor(NORM_MEAN).view(1, 3, 1, 1)
    std = torch.tensor(NORM_STD).view(1, 3, 1, 1)
    return (batch - mean) / std


class RandomCnnEncoder(nn.Module):
    """Weights-free deterministic encoder: a frozen randomly initialized CNN.

    Useful as a hermetic stand-in where pretrained weights cannot be
    downloaded; embeddings are a fixed random projection of multi-scale image
    statistics, not semantic features.
    """

    name = "random-cnn"
    dim = _RANDOM_CNN_DIM

    def __init__(self):
        super().__init__()
        generator = torch.Generator().manual_seed(_RANDOM_CNN_SEED)
        torch.manual_seed(_RANDOM_CNN_SEED)
        self.net = nn.Sequential(
            nn.Conv2d(3, 32, 5, stride=2, padding=2),
            nn.GELU(),
            nn.Conv2d(32, 64, 3, stride=2, padding=1),
            nn.GELU(),
            nn.Conv2d(64, 128, 3, stride=2, padding=1),
            nn.GELU(),
            nn.Conv2d(128, _RANDOM_CNN_DIM, 3, stride=2, padding=1),
            nn.GELU(),
            nn.AdaptiveAvgPool2d(1),
        )
        for module in self.net.modules():
            if isinstance(module, nn.Conv2d):
                nn.init.normal_(module.weight, std=0.05, generator=generator)
                nn.init.zeros_(module.bias)
        self.eval()

    @torch.no_grad()
    def forward(self, batch: torch.Tensor) -> torch.Tensor:
        return self.net(preprocess(batch)).flatten(1)


class HfVisionEncoder(nn.Module):
    """Pretrained transformer encoder via Hugging Face (e.g. DINOv2-class);
    pools the class token. Requires downloadable weights."""

    def __init__(self, model_name: str, device: str = "cpu"):
        super().__init__()
        try:
            from transformers import AutoImageProcessor, AutoModel
        except ImportError as exc:
            raise EncoderError(f"transformers not installed: {exc}") from exc
        try:
            self.processor = AutoImageProcessor.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name).to(device)
        except Exception as exc:
            raise EncoderError(f"cannot load encoder {model_name!r}: {exc}") from exc
        self.model.eval()
        self.name = model_name
        self.device = device
        self.dim = int(self.model.config.hidden_size)

    @torch.no_grad()
    def forward(self, batch: torch.Tensor) -> torch.Tensor:
        inputs = self.processor(
            images=[(img * 255).byte().permute(1, 2, 0).numpy() for img in batch],
            return_tensors="pt").to(self.device)
        output = self.model(**inputs)
        return output.last_hidden_state[:, 0, :].cpu()


def build_encoder(name: str, device: str = "cpu") -> nn.Module:
    if name == RandomCnnEncoder.name:
        return RandomCnnEncoder()
    if name.startswith("hf:"):
        return HfVisionEncoder(name[3:], device)
    raise EncoderError(
        f"unknown encoder {name!r}: use 'random-cnn' or 'hf:<model-name>'")
