"""Shared network building blocks: encoders, projection heads, 3D backbones."""

from __future__ import annotations

import torch
import torch.nn as nn

from .errors import ConfigurationError


class ProjectionHead(nn.Module):
    """MLP head whose hidden-layer inputs are standardized batch-wise (zero
    mean, unit variance with learned scale/shift) before each ReLU. The final
    layer emits raw logits."""

    def __init__(self, in_dim: int, widths: tuple[int, ...], dropout: float):
        super().__init__()
        layers: list[nn.Module] = []
        prev = in_dim
        for width in widths[:-1]:
            layers += [nn.Linear(prev, width), nn.BatchNorm1d(width), nn.ReLU(inplace=True),
                       nn.Dropout(dropout)]
            prev = width
        layers.append(nn.Linear(prev, widths[-1]))
        self.net = nn.Sequential(*layers)

    def forward(self, x):
        return self.net(x)


class ConvEncoder(nn.Module):
    """Small 4-block convolutional image encoder emitting an embedding vector.
    Trains from scratch; stands in for any pretrained face encoder."""

    def __init__(self, embed_dim: int = 256, widths: tuple[int, ...] = (16, 32, 64, 128),
                 in_channels: int = 3):
        super().__init__()
        blocks: list[nn.Module] = []
        prev = in_channels
        for width in widths:
            blocks += [nn.Conv2d(prev, width, 3, stride=2, padding=1, bias=False),
                       nn.BatchNorm2d(width), nn.ReLU(inplace=True)]
            prev = width
        self.blocks = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.proj = nn.Linear(prev, embed_dim)
        self.embed_dim = embed_dim

    def forward(self, x):
        return self.proj(self.pool(self.blocks(x)).flatten(1))


class FlattenEncoder(nn.Module):
    """Identity-style encoder: the flattened pixels are the embedding.
    Useful for toy checks where the embedding must equal the input."""

    def __init__(self, embed_dim: int):
        super().__init__()
        self.embed_dim = embed_dim

    def forward(self, x):
        flat = x.flatten(1)
        if flat.shape[1] != self.embed_dim:
            raise ValueError(f"expected {self.embed_dim} pixels, got {flat.shape[1]}")
        return flat


ENCODERS = {"conv4": ConvEncoder, "flatten": FlattenEncoder}


def build_encoder(name: str, embed_dim: int) -> nn.Module:
    if name not in ENCODERS:
        raise ConfigurationError(f"unknown encoder {name!r}; known: {sorted(ENCODERS)}")
    return ENCODERS[name](embed_dim=embed_dim)


class Toy3DBackbone(nn.Module):
    """Four strided Conv3d blocks and a global average pool; the desk-scale
    default clip backbone (128-d features)."""

    def __init__(self, widths: tuple[int, ...] = (16, 32, 64, 128),
                 feature_dim: int | None = None, in_channels: int = 3):
        super().__init__()
        blocks: list[nn.Module] = []
        prev = in_channels
        for width in widths:
            blocks += [nn.Conv3d(prev, width, 3, stride=(1, 2, 2), padding=1, bias=False),
                       nn.BatchNorm3d(width), nn.ReLU(inplace=True)]
            prev = width
        self.blocks = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool3d(1)
        self.feature_dim = feature_dim if feature_dim is not None else prev
        self.proj = nn.Identity() if self.feature_dim == prev else nn.Linear(prev, self.feature_dim)

    def forward(self, x):
        return self.proj(self.pool(self.blocks(x)).flatten(1))


def _conv3x3x3(cin, cout, stride=1):
    return nn.Conv3d(cin, cout, 3, stride=stride, padding=1, bias=False)


class BasicBlock3D(nn.Module):
    expansion = 1

    def __init__(self, cin, cout, stride=1, downsample=None):
        super().__init__()
        self.conv1 = _conv3x3x3(cin, cout, stride)
        self.bn1 = nn.BatchNorm3d(cout)
        self.conv2 = _conv3x3x3(cout, cout)
        self.bn2 = nn.BatchNorm3d(cout)
        self.relu = nn.ReLU(inplace=True)
        self.downsample = downsample

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


class Bottleneck3D(nn.Module):
    expansion = 4

    def __init__(self, cin, cout, stride=1, downsample=None):
        super().__init__()
        self.conv1 = nn.Conv3d(cin, cout, 1, bias=False)
        self.bn1 = nn.BatchNorm3d(cout)
        self.conv2 = _conv3x3x3(cout, cout, stride)
        self.bn2 = nn.BatchNorm3d(cout)
        self.conv3 = nn.Conv3d(cout, cout * self.expansion, 1, bias=False)
        self.bn3 = nn.BatchNorm3d(cout * self.expansion)
        self.relu = nn.ReLU(inplace=True)
        self.downsample = downsample

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.relu(self.bn2(self.conv2(out)))
        out = self.bn3(self.conv3(out))
        return self.relu(out + identity)


class ResNet3D(nn.Module):
    """3D-convolutional ResNet over clip tensors (N, 3, frames, H, W).

    Global average pooling is followed by a linear projection whenever the
    requested feature_dim differs from the native stage width."""

    def __init__(self, block, layers: tuple[int, int, int, int], feature_dim: int = 1024,
                 in_channels: int = 3):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv3d(in_channels, 64, (3, 7, 7), stride=(1, 2, 2), padding=(1, 3, 3), bias=False),
            nn.BatchNorm3d(64), nn.ReLU(inplace=True))
        self.inplanes = 64
        self.layer1 = self._make_layer(block, 64, layers[0])
        self.layer2 = self._make_layer(block, 128, layers[1], stride=2)
        self.layer3 = self._make_layer(block, 256, layers[2], stride=2)
        self.layer4 = self._make_layer(block, 512, layers[3], stride=2)
        self.pool = nn.AdaptiveAvgPool3d(1)
        native = 512 * block.expansion
        self.feature_dim = feature_dim
        self.proj = nn.Identity() if feature_dim == native else nn.Linear(native, feature_dim)

    def _make_layer(self, block, planes, count, stride=1):
        downsample = None
        if stride != 1 or self.inplanes != planes * block.expansion:
            downsample = nn.Sequential(
                nn.Conv3d(self.inplanes, planes * block.expansion, 1, stride=stride, bias=False),
                nn.BatchNorm3d(planes * block.expansion))
        blocks = [block(self.inplanes, planes, stride, downsample)]
        self.inplanes = planes * block.expansion
        for _ in range(1, count):
            blocks.append(block(self.inplanes, planes))
        return nn.Sequential(*blocks)

    def forward(self, x):
        x = self.stem(x)
        x = self.layer4(self.layer3(self.layer2(self.layer1(x))))
        return self.proj(self.pool(x).flatten(1))


BACKBONE_FAMILIES = ("toy3d", "resnet3d-18", "resnet3d-34", "resnet3d-50")


def build_backbone(family: str, feature_dim: int | None = None) -> nn.Module:
    """Backbone by family name; feature_dim=None takes the family default
    (128 for toy3d, 1024 for the resnet3d family)."""
    if family == "toy3d":
        return Toy3DBackbone(feature_dim=feature_dim)
    resnets = {
        "resnet3d-18": (BasicBlock3D, (2, 2, 2, 2)),
        "resnet3d-34": (BasicBlock3D, (3, 4, 6, 3)),
        "resnet3d-50": (Bottleneck3D, (3, 4, 6, 3)),
    }
    if family not in resnets:
        raise ConfigurationError(f"unknown backbone {family!r}; known: {BACKBONE_FAMILIES}")
    block, layers = resnets[family]
    return ResNet3D(block, layers, feature_dim=1024 if feature_dim is None else feature_dim)
