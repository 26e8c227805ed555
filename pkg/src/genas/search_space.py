"""Genome representation and the constrained architecture search space.

A genome is a flat string of non-negative integers where each group of
four genes describes one convolutional cell: filter count, filter size,
convolution stride and pooling stride.  A pooling stride of 1 means the
cell carries no pooling layer; a filter size of 0 (legal only when
explicitly enabled) means it carries no convolution layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GENES_PER_CELL = 4


class InvalidGenomeError(ValueError):
    """A genome violated its search space; violations lists the reasons."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class SearchSpace:
    """Allowed gene values and genome length bounds."""

    filter_counts: tuple[int, ...] = (4, 8, 16, 32, 64, 128, 256)
    filter_sizes: tuple[int, ...] = (1, 3, 5, 7, 11)
    conv_stride_range: tuple[int, int] = (1, 2)
    pool_stride_range: tuple[int, int] = (1, 2)
    min_cells: int = 2
    max_cells: int = 50
    input_height: int = 64
    input_width: int = 64
    input_channels: int = 1
    # Filter size 0 ("cell without a conv layer") is representable but
    # excluded from the default space, so it hides behind this flag.
    allow_skip_conv: bool = False

    def __post_init__(self):
        object.__setattr__(self, "filter_counts", tuple(int(v) for v in self.filter_counts))
        object.__setattr__(self, "filter_sizes", tuple(int(v) for v in self.filter_sizes))
        object.__setattr__(self, "conv_stride_range", tuple(int(v) for v in self.conv_stride_range))
        object.__setattr__(self, "pool_stride_range", tuple(int(v) for v in self.pool_stride_range))
        if not self.filter_counts or not self.filter_sizes:
            raise ValueError("filter_counts and filter_sizes must be non-empty")
        if self.min_cells < 1 or self.max_cells < self.min_cells:
            raise ValueError("need 1 <= min_cells <= max_cells")
        for name in ("conv_stride_range", "pool_stride_range"):
            bounds = getattr(self, name)
            if len(bounds) != 2 or bounds[0] < 1 or bounds[1] < bounds[0]:
                raise ValueError(f"{name} must be an interval with 1 <= lo <= hi")
        if min(self.input_height, self.input_width, self.input_channels) < 1:
            raise ValueError("input dimensions must be >= 1")

    @property
    def genome_filter_sizes(self) -> tuple[int, ...]:
        """Filter sizes legal in a genome, 0 included when skip is allowed."""
        if self.allow_skip_conv and 0 not in self.filter_sizes:
            return (0,) + self.filter_sizes
        return self.filter_sizes

    def conv_strides(self) -> tuple[int, ...]:
        lo, hi = self.conv_stride_range
        return tuple(range(lo, hi + 1))

    def pool_strides(self) -> tuple[int, ...]:
        lo, hi = self.pool_stride_range
        return tuple(range(lo, hi + 1))


@dataclass(frozen=True)
class Genome:
    """Immutable integer gene string."""

    genes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(int(g) for g in self.genes))

    def __len__(self) -> int:
        return len(self.genes)

    @property
    def cell_count(self) -> int:
        return len(self.genes) // GENES_PER_CELL

    def cell(self, i: int) -> tuple[int, int, int, int]:
        """(filter count, filter size, conv stride, pool stride) of cell i."""
        base = i * GENES_PER_CELL
        return self.genes[base:base + GENES_PER_CELL]

    def cells(self) -> list[tuple[int, int, int, int]]:
        return [self.cell(i) for i in range(self.cell_count)]

    def to_text(self) -> str:
        """Comma-separated integers, the on-disk and CLI line format."""
        return ",".join(str(g) for g in self.genes)

    @classmethod
    def from_text(cls, text: str) -> "Genome":
        return cls(tuple(int(tok) for tok in text.strip().split(",")))


def random_genome(space: SearchSpace, rng: np.random.Generator) -> Genome:
    """Draw a genome uniformly from the space.

    The cell count comes from [min_cells, max_cells] and every gene from
    its allowed set, all from the caller's stream.
    """
    n_cells = int(rng.integers(space.min_cells, space.max_cells + 1))
    counts = rng.choice(space.filter_counts, size=n_cells)
    sizes = rng.choice(space.genome_filter_sizes, size=n_cells)
    conv = rng.integers(space.conv_stride_range[0], space.conv_stride_range[1] + 1, size=n_cells)
    pool = rng.integers(space.pool_stride_range[0], space.pool_stride_range[1] + 1, size=n_cells)
    genes = np.column_stack([counts, sizes, conv, pool]).ravel()
    return Genome(tuple(int(g) for g in genes))


def validate_genome(genome: Genome, space: SearchSpace) -> list[str]:
    """List of constraint violations; empty means the genome is valid."""
    n = len(genome.genes)
    if n % GENES_PER_CELL != 0:
        return [f"length {n} is not a multiple of {GENES_PER_CELL}"]
    violations = []
    lo = GENES_PER_CELL * space.min_cells
    hi = GENES_PER_CELL * space.max_cells
    if not lo <= n <= hi:
        violations.append(f"length {n} outside [{lo}, {hi}]")
    allowed = (
        set(space.filter_counts),
        set(space.genome_filter_sizes),
        set(space.conv_strides()),
        set(space.pool_strides()),
    )
    names = ("filter count", "filter size", "conv stride", "pool stride")
    for idx, gene in enumerate(genome.genes):
        slot = idx % GENES_PER_CELL
        if gene not in allowed[slot]:
            violations.append(f"gene {idx}: {names[slot]} {gene} not allowed")
    return violations
