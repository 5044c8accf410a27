"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from ..errors import InvalidConfig


@dataclass(frozen=True)
class ModelConfig:
    emb_size: int = 64
    gcn_layers: int = 2
    sampled_nodes: int = 512
    attn_layers: int = 6
    attn_heads: int = 8
    ffn_dim: int = 0  # 0 means 4 * emb_size
    out_dim: int = 4096
    temperature: float = 1.0
    lr: float = 1e-3
    lr_schedule: str = "cosine"  # or "constant"
    batch_size: int = 64
    epochs: int = 100
    split_ratio: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.ffn_dim == 0:
            object.__setattr__(self, "ffn_dim", 4 * self.emb_size)
        self.validate()

    def validate(self) -> None:
        positive = ("emb_size", "sampled_nodes", "attn_heads", "ffn_dim", "out_dim", "batch_size")
        for name in positive:
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1")
        for name in ("gcn_layers", "attn_layers", "epochs"):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be >= 0")
        if self.emb_size % self.attn_heads:
            raise InvalidConfig(
                f"emb_size {self.emb_size} is not divisible by attn_heads {self.attn_heads}"
            )
        if not 0.0 < self.split_ratio < 1.0:
            raise InvalidConfig("split_ratio must lie in (0, 1)")
        if not self.temperature > 0:
            raise InvalidConfig("temperature must be positive")
        if self.lr < 0:
            raise InvalidConfig("lr must be non-negative")
        if self.lr_schedule not in ("cosine", "constant"):
            raise InvalidConfig(f"unknown lr_schedule {self.lr_schedule!r}")

    @classmethod
    def toy(cls, **overrides) -> "ModelConfig":
        """Desk-scale configuration used by the acceptance runs."""
        base = dict(sampled_nodes=128, out_dim=256, temperature=0.1)
        base.update(overrides)
        return cls(**base)

    def with_(self, **changes) -> "ModelConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise InvalidConfig(f"unknown config keys {sorted(unknown)}")
        out = {}
        for k, v in d.items():
            default = getattr(cls, k)
            out[k] = type(default)(v)
        return cls(**out)
