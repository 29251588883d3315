"""Compact anchor-free detector with a decoupled DFL + classification head.

Three stride levels (8, 16, 32), group-normed convolutions (stable at
batch size 1), and a decode module producing the pretransformed
(cx, cy, w, h, per-class probability) layout the detection toolkit's
backends accept.
"""

from __future__ import annotations

import torch
from torch import nn

STRIDES = (8, 16, 32)


def conv_block(c_in: int, c_out: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, 3, stride=stride, padding=1, bias=False),
        nn.GroupNorm(8, c_out),
        nn.SiLU(inplace=True),
    )


class Backbone(nn.Module):
    """Five downsampling stages to /8, /16, /32 feature maps."""

    def __init__(self, width: int = 32):
        super().__init__()
        w = width
        self.stem = conv_block(3, 16, stride=2)          # /2
        self.stage2 = conv_block(16, w, stride=2)        # /4
        self.stage3 = nn.Sequential(conv_block(w, w * 2, stride=2), conv_block(w * 2, w * 2))   # /8
        self.stage4 = nn.Sequential(conv_block(w * 2, w * 3, stride=2), conv_block(w * 3, w * 3))  # /16
        self.stage5 = nn.Sequential(conv_block(w * 3, w * 4, stride=2), conv_block(w * 4, w * 4))  # /32
        self.out_channels = (w * 2, w * 3, w * 4)

    def forward(self, x):
        x = self.stage2(self.stem(x))
        p3 = self.stage3(x)
        p4 = self.stage4(p3)
        p5 = self.stage5(p4)
        return p3, p4, p5


class Head(nn.Module):
    """Decoupled branches: 4*reg_max distance logits and nc class logits."""

    def __init__(self, c_in: int, reg_max: int, nc: int, hidden: int = 64):
        super().__init__()
        self.reg = nn.Sequential(conv_block(c_in, hidden), nn.Conv2d(hidden, 4 * reg_max, 1))
        self.cls = nn.Sequential(conv_block(c_in, hidden), nn.Conv2d(hidden, nc, 1))

    def forward(self, x):
        return torch.cat([self.reg(x), self.cls(x)], dim=1)


class Detector(nn.Module):
    """Raw-output detector: list of (B, 4*reg_max + nc, H/s, W/s) levels."""

    def __init__(self, nc: int, reg_max: int = 16, width: int = 32):
        super().__init__()
        self.nc = nc
        self.reg_max = reg_max
        self.strides = STRIDES
        self.backbone = Backbone(width)
        self.heads = nn.ModuleList(
            Head(c, reg_max, nc) for c in self.backbone.out_channels
        )

    def forward(self, x):
        features = self.backbone(x)
        return [head(f) for head, f in zip(self.heads, features)]


def make_anchors(size: int, strides=STRIDES) -> tuple[torch.Tensor, torch.Tensor]:
    """Cell-center anchor points (A, 2) and per-anchor strides (A,)."""
    points, anchor_strides = [], []
    for s in strides:
        g = size // s
        coords = (torch.arange(g, dtype=torch.float32) + 0.5) * s
        gy, gx = torch.meshgrid(coords, coords, indexing="ij")
        points.append(torch.stack([gx.reshape(-1), gy.reshape(-1)], dim=1))
        anchor_strides.append(torch.full((g * g,), float(s)))
    return torch.cat(points), torch.cat(anchor_strides)


class Decoder(nn.Module):
    """DFL expectation + sigmoid scoring over concatenated levels."""

    def __init__(self, reg_max: int, nc: int, size: int, strides=STRIDES):
        super().__init__()
        self.reg_max = reg_max
        self.nc = nc
        points, anchor_strides = make_anchors(size, strides)
        self.register_buffer("points", points)  # (A, 2)
        self.register_buffer("anchor_strides", anchor_strides)  # (A,)
        self.register_buffer("proj", torch.arange(reg_max, dtype=torch.float32))

    def distances(self, flat_reg: torch.Tensor) -> torch.Tensor:
        """(B, 4*reg_max, A) logits -> (B, 4, A) expected distances (bins)."""
        b, _, a = flat_reg.shape
        probs = flat_reg.view(b, 4, self.reg_max, a).softmax(dim=2)
        return (probs * self.proj.view(1, 1, self.reg_max, 1)).sum(dim=2)

    def boxes(self, flat_reg: torch.Tensor) -> torch.Tensor:
        """(B, 4*reg_max, A) logits -> (B, 4, A) boxes as x1, y1, x2, y2."""
        dist = self.distances(flat_reg) * self.anchor_strides.view(1, 1, -1)
        points = self.points.t().unsqueeze(0)  # (1, 2, A)
        x1y1 = points - dist[:, :2]
        x2y2 = points + dist[:, 2:]
        return torch.cat([x1y1, x2y2], dim=1)

    def forward(self, levels: list[torch.Tensor]) -> torch.Tensor:
        flat = torch.cat([level.flatten(2) for level in levels], dim=2)
        reg, cls = flat.split([4 * self.reg_max, self.nc], dim=1)
        xyxy = self.boxes(reg)
        cxcy = (xyxy[:, :2] + xyxy[:, 2:]) / 2.0
        wh = xyxy[:, 2:] - xyxy[:, :2]
        return torch.cat([cxcy, wh, cls.sigmoid()], dim=1)  # (B, 4+nc, A)


class ExportPretransformed(nn.Module):
    """Detector + decoder fused for TorchScript export."""

    def __init__(self, detector: Detector, size: int):
        super().__init__()
        self.detector = detector
        self.decoder = Decoder(detector.reg_max, detector.nc, size, detector.strides)

    def forward(self, x):
        return self.decoder(self.detector(x))


class ExportRaw(nn.Module):
    """Detector emitting raw per-level logit tensors."""

    def __init__(self, detector: Detector):
        super().__init__()
        self.detector = detector

    def forward(self, x):
        return tuple(self.detector(x))
