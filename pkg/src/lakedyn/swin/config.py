"""Architecture configuration for the windowed-attention segmentation net."""

from dataclasses import dataclass

from ..errors import ConfigError


@dataclass(frozen=True)
class SwinConfig:
    """Hyperparameters of one model variant.

    ``depths`` and ``heads`` carry one entry per stage; the last stage is
    the bottleneck, the earlier ones are each followed by a patch merge.
    Channel width at stage ``s`` is ``embed_dim * 2**s``.
    """

    embed_dim: int = 96
    depths: tuple = (2, 4, 6, 8, 10)
    heads: tuple = (12, 24, 48, 96, 192)
    patch_size: int = 4
    window_size: int = 7
    in_channels: int = 1
    num_classes: int = 2
    mlp_ratio: float = 4.0

    @property
    def num_stages(self):
        return len(self.depths)

    def stage_dim(self, stage):
        return self.embed_dim * (2 ** stage)

    def validate(self):
        if len(self.depths) != len(self.heads):
            raise ConfigError(
                f"depths ({len(self.depths)}) and heads ({len(self.heads)}) "
                "must have one entry per stage"
            )
        if len(self.depths) < 2:
            raise ConfigError("need at least two stages (one merge)")
        for s, (depth, heads) in enumerate(zip(self.depths, self.heads)):
            if depth % 2 != 0:
                raise ConfigError(
                    f"stage {s}: depth {depth} is odd; attention blocks pair "
                    "a plain-window with a shifted-window block"
                )
            if self.stage_dim(s) % heads != 0:
                raise ConfigError(
                    f"stage {s}: {self.stage_dim(s)} channels not divisible "
                    f"by {heads} heads"
                )
        if self.patch_size < 1 or self.window_size < 1:
            raise ConfigError("patch and window sizes must be positive")
        return self


# Variant names and their depth/head ladders follow the published table
# verbatim.  Naming note: "t" is the deepest/widest ladder and "l" the
# smallest; the labels are kept as-is rather than reordered by size.
VARIANTS = {
    "swin-unet-t": SwinConfig(depths=(2, 4, 6, 8, 10), heads=(12, 24, 48, 96, 192)),
    "swin-unet-s": SwinConfig(depths=(2, 2, 4, 6, 8), heads=(6, 12, 24, 48, 96)),
    "swin-unet-l": SwinConfig(depths=(2, 2, 2, 4, 6), heads=(3, 6, 12, 24, 48)),
    # Reduced harness for 64x64 tiles: same code path, smaller ladder.
    "swin-unet-test": SwinConfig(
        embed_dim=32, depths=(2, 2, 2), heads=(2, 4, 8), window_size=4
    ),
}


def get_config(name):
    try:
        return VARIANTS[name]
    except KeyError:
        raise ConfigError(
            f"unknown model variant {name!r}; choose from {sorted(VARIANTS)}"
        ) from None
