"""Genotype to phenotype translation with shape-driven pruning.

Cells materialize in gene order.  Every convolution and pooling layer
shrinks the feature map by the valid-convolution rule (zero padding),
and translation stops at the first layer that would drive either
spatial dimension below one pixel; the cells left over count as pruned.
A fixed classifier tail is appended to whatever survives.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from .search_space import Genome, InvalidGenomeError, SearchSpace, validate_genome

# Folded into every digest so stale cache files cannot alias new keys.
KEY_VERSION = 1

TAIL_DENSE_UNITS = 1024
TAIL_POOL_STRIDE = 2


def out_dim(current: int, f: int, s: int, p: int = 0) -> int:
    """Spatial size after a size-f window with stride s and padding p.

    floor((current - f + 2p) / s) + 1.  Results below 1 mean the window
    no longer fits; callers treat that as infeasible.
    """
    return (current - f + 2 * p) // s + 1


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a concrete architecture.

    kind is conv, max_pool, avg_pool, dense or output.  Pool windows
    equal their stride, and padding is zero everywhere, so neither
    carries a field.
    """

    kind: str
    filters: int = 0
    size: int = 0
    stride: int = 0
    units: int = 0
    activation: str = "none"


@dataclass(frozen=True)
class Phenotype:
    """Layer stack decoded from a genome, tail included.

    shapes holds the output (height, width, channels) of each layer;
    dense and output layers record (1, 1, units).
    """

    layers: tuple[LayerSpec, ...]
    shapes: tuple[tuple[int, int, int], ...]
    input_shape: tuple[int, int, int]
    cells_kept: int
    cells_pruned: int
    source_genome: Genome


@dataclass(frozen=True)
class ArchKey:
    """Content hash identifying a phenotype in the fitness cache."""

    digest: str


def compile_cells(cells, input_shape) -> Phenotype:
    """Materialize a cell list over input_shape and append the tail.

    Filter size 0 omits the cell's conv layer (channel count unchanged)
    and pool stride 1 omits its pool layer; neither is a pruning event.
    The first conv or pool whose output height or width would fall below
    1 stops translation, and every cell not fully materialized counts as
    pruned.  The tail is avg_pool(2), skipped when its input is already
    a single pixel wide or tall, then two dense(1024) layers and the
    sigmoid output unit.
    """
    h, w, c = input_shape
    layers: list[LayerSpec] = []
    shapes: list[tuple[int, int, int]] = []
    kept = 0
    for n_filters, f_size, conv_stride, pool_stride in cells:
        if f_size > 0:
            nh, nw = out_dim(h, f_size, conv_stride), out_dim(w, f_size, conv_stride)
            if nh < 1 or nw < 1:
                break
            layers.append(LayerSpec("conv", filters=n_filters, size=f_size,
                                    stride=conv_stride, activation="selu"))
            h, w, c = nh, nw, n_filters
            shapes.append((h, w, c))
        if pool_stride > 1:
            nh = out_dim(h, pool_stride, pool_stride)
            nw = out_dim(w, pool_stride, pool_stride)
            if nh < 1 or nw < 1:
                break
            layers.append(LayerSpec("max_pool", size=pool_stride, stride=pool_stride))
            h, w = nh, nw
            shapes.append((h, w, c))
        kept += 1

    if h >= TAIL_POOL_STRIDE and w >= TAIL_POOL_STRIDE:
        layers.append(LayerSpec("avg_pool", size=TAIL_POOL_STRIDE, stride=TAIL_POOL_STRIDE))
        h = out_dim(h, TAIL_POOL_STRIDE, TAIL_POOL_STRIDE)
        w = out_dim(w, TAIL_POOL_STRIDE, TAIL_POOL_STRIDE)
        shapes.append((h, w, c))
    for _ in range(2):
        layers.append(LayerSpec("dense", units=TAIL_DENSE_UNITS, activation="selu"))
        shapes.append((1, 1, TAIL_DENSE_UNITS))
    layers.append(LayerSpec("output", units=1, activation="sigmoid"))
    shapes.append((1, 1, 1))

    genes = tuple(g for cell in cells for g in cell)
    return Phenotype(
        layers=tuple(layers),
        shapes=tuple(shapes),
        input_shape=tuple(input_shape),
        cells_kept=kept,
        cells_pruned=len(cells) - kept,
        source_genome=Genome(genes),
    )


def decode(genome: Genome, space: SearchSpace) -> Phenotype:
    """Translate a genome into a concrete layer stack.

    Raises InvalidGenomeError when the genome violates the space.
    """
    violations = validate_genome(genome, space)
    if violations:
        raise InvalidGenomeError(violations)
    shape = (space.input_height, space.input_width, space.input_channels)
    return replace(compile_cells(genome.cells(), shape), source_genome=genome)


def feature_shape(p: Phenotype) -> tuple[int, int, int]:
    """Shape entering the classifier tail; the input shape when no cell survived."""
    shape = p.input_shape
    for layer, s in zip(p.layers, p.shapes):
        if layer.kind not in ("conv", "max_pool"):
            break
        shape = s
    return shape


def layer_param_counts(p: Phenotype) -> list[int]:
    """Trainable parameters per layer, in layer order.

    Conv layers contribute size*size*c_in*filters + filters, dense and
    output layers fan_in*units + units, pools nothing.
    """
    h, w, c = p.input_shape
    fan_in = 0
    flattened = False
    counts = []
    for layer, shape in zip(p.layers, p.shapes):
        if layer.kind == "conv":
            counts.append(layer.size * layer.size * c * layer.filters + layer.filters)
        elif layer.kind in ("dense", "output"):
            if not flattened:
                fan_in = h * w * c
                flattened = True
            counts.append(fan_in * layer.units + layer.units)
            fan_in = layer.units
        else:
            counts.append(0)
        h, w, c = shape
    return counts


def param_count(p: Phenotype) -> int:
    """Total trainable parameters of the stack."""
    return sum(layer_param_counts(p))


def conv_layer_count(p: Phenotype) -> int:
    return sum(1 for layer in p.layers if layer.kind == "conv")


def serialize(p: Phenotype) -> str:
    """Canonical text form of the layer stack, the hash input for keys.

    Depends only on the materialized layers and the input shape, never
    on the source genome, so genomes pruning to the same architecture
    serialize identically.
    """
    lines = [f"v{KEY_VERSION}", "input {}x{}x{}".format(*p.input_shape)]
    for layer in p.layers:
        if layer.kind == "conv":
            lines.append(f"conv filters={layer.filters} size={layer.size} "
                         f"stride={layer.stride} act={layer.activation}")
        elif layer.kind in ("max_pool", "avg_pool"):
            lines.append(f"{layer.kind} size={layer.size} stride={layer.stride}")
        else:
            lines.append(f"{layer.kind} units={layer.units} act={layer.activation}")
    return "\n".join(lines)


def canonical_key(p: Phenotype) -> ArchKey:
    return ArchKey(hashlib.sha256(serialize(p).encode()).hexdigest())


def to_wire(p: Phenotype) -> dict:
    """Architecture half of a train request; field names are fixed."""
    layers = []
    for layer in p.layers:
        if layer.kind == "conv":
            layers.append({"kind": "conv", "filters": layer.filters,
                           "size": layer.size, "stride": layer.stride})
        elif layer.kind in ("max_pool", "avg_pool"):
            layers.append({"kind": layer.kind, "stride": layer.stride})
        else:
            layers.append({"kind": layer.kind, "units": layer.units,
                           "act": layer.activation})
    return {"input": list(p.input_shape), "layers": layers}


def describe(p: Phenotype) -> list[dict]:
    """Per-layer display rows: geometry, output shape and parameters."""
    rows = []
    for layer, shape, params in zip(p.layers, p.shapes, layer_param_counts(p)):
        rows.append({
            "kind": layer.kind,
            "filters": layer.filters or None,
            "size": layer.size or None,
            "stride": layer.stride or None,
            "units": layer.units or None,
            "activation": None if layer.activation == "none" else layer.activation,
            "out_shape": list(shape),
            "params": params,
        })
    return rows
