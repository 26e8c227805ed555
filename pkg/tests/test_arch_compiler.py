import numpy as np
import pytest

from genas.arch_compiler import (canonical_key, compile_cells, conv_layer_count,
                                 decode, describe, feature_shape,
                                 layer_param_counts, out_dim, param_count,
                                 serialize, to_wire)
from genas.search_space import Genome, InvalidGenomeError, SearchSpace, random_genome

from oracles import conv_out, simulate_cells, simulate_params

INPUT = (64, 64, 1)


def kinds(p):
    return [layer.kind for layer in p.layers]


def test_out_dim_matches_oracle():
    for current in range(1, 70):
        for f in (1, 2, 3, 5, 7, 11):
            for s in (1, 2, 3):
                assert out_dim(current, f, s) == conv_out(current, f, s)
    assert out_dim(64, 3, 1) == 62
    assert out_dim(62, 2, 2) == 31
    assert out_dim(1, 2, 2) == 0


def test_tail_only_network_parameter_total():
    p = compile_cells([], INPUT)
    # 64x64 -> avg_pool -> 32x32x1 = 1024 inputs; two dense 1024 blocks
    # and the sigmoid unit.
    assert param_count(p) == 2_100_225
    assert kinds(p) == ["avg_pool", "dense", "dense", "output"]


def test_single_cell_network_parameter_breakdown():
    p = compile_cells([(8, 3, 1, 2)], INPUT)
    assert kinds(p) == ["conv", "max_pool", "avg_pool", "dense", "dense", "output"]
    assert p.shapes == ((62, 62, 8), (31, 31, 8), (15, 15, 8),
                        (1, 1, 1024), (1, 1, 1024), (1, 1, 1))
    assert layer_param_counts(p) == [80, 0, 0, 1_844_224, 1_049_600, 1_025]
    assert param_count(p) == 2_894_929


def test_conv_parameters_scale_with_filter_count():
    base = layer_param_counts(compile_cells([(8, 3, 1, 2)], INPUT))[0]
    doubled = layer_param_counts(compile_cells([(16, 3, 1, 2)], INPUT))[0]
    assert (base, doubled) == (80, 160)


def test_pruning_stops_at_first_infeasible_cell():
    p = compile_cells([(8, 11, 2, 2)] * 3, INPUT)
    assert (p.cells_kept, p.cells_pruned) == (2, 1)
    assert kinds(p) == ["conv", "max_pool", "conv", "max_pool",
                        "dense", "dense", "output"]
    # 64 -> 27 -> 13 -> 2 -> 1; a third 11-wide conv cannot fit, and the
    # tail pool is skipped on a 1x1 map.
    assert p.shapes[:4] == ((27, 27, 8), (13, 13, 8), (2, 2, 8), (1, 1, 8))
    assert feature_shape(p) == (1, 1, 8)


def test_partially_feasible_cell_keeps_its_conv_but_counts_pruned():
    p = compile_cells([(8, 11, 2, 2), (8, 11, 2, 2), (8, 1, 1, 2)], INPUT)
    assert (p.cells_kept, p.cells_pruned) == (2, 1)
    # The third cell's 1x1 conv fits on the 1x1 map and stays; its pool
    # does not, which prunes the cell.
    assert kinds(p) == ["conv", "max_pool", "conv", "max_pool", "conv",
                        "dense", "dense", "output"]
    assert p.layers[4].size == 1
    assert feature_shape(p) == (1, 1, 8)


def test_skip_conv_and_no_pool_cells_add_no_layers():
    p = compile_cells([(8, 0, 1, 1), (16, 3, 1, 2)], INPUT)
    assert (p.cells_kept, p.cells_pruned) == (2, 0)
    assert kinds(p)[0] == "conv"
    assert p.layers[0].filters == 16
    pool_only = compile_cells([(4, 0, 1, 2), (8, 3, 1, 1)], INPUT)
    assert kinds(pool_only)[:2] == ["max_pool", "conv"]
    # The skipped conv leaves the channel count alone.
    assert pool_only.shapes[0] == (32, 32, 1)


def test_decode_validates_and_records_the_source_genome():
    space = SearchSpace()
    genome = Genome((8, 3, 1, 2, 16, 3, 1, 2))
    p = decode(genome, space)
    assert p.source_genome == genome
    assert p.input_shape == INPUT
    with pytest.raises(InvalidGenomeError):
        decode(Genome((8, 3, 1, 2)), space)


def test_canonical_key_is_phenotype_based():
    a = compile_cells([(8, 11, 2, 2)] * 3, INPUT)
    b = compile_cells([(8, 11, 2, 2), (8, 11, 2, 2), (4, 11, 2, 2)], INPUT)
    # Both genomes prune their third cell, so the layer stacks coincide.
    assert a.layers == b.layers
    assert canonical_key(a) == canonical_key(b)
    c = compile_cells([(8, 3, 1, 2)], INPUT)
    assert canonical_key(a) != canonical_key(c)
    digest = canonical_key(a).digest
    assert len(digest) == 64 and digest == digest.lower()


def test_serialize_format_is_frozen():
    p = compile_cells([(8, 3, 1, 2)], INPUT)
    assert serialize(p) == "\n".join([
        "v1",
        "input 64x64x1",
        "conv filters=8 size=3 stride=1 act=selu",
        "max_pool size=2 stride=2",
        "avg_pool size=2 stride=2",
        "dense units=1024 act=selu",
        "dense units=1024 act=selu",
        "output units=1 act=sigmoid",
    ])


def test_wire_format_field_names_are_frozen():
    p = compile_cells([(8, 3, 2, 2)], INPUT)
    assert to_wire(p) == {
        "input": [64, 64, 1],
        "layers": [
            {"kind": "conv", "filters": 8, "size": 3, "stride": 2},
            {"kind": "max_pool", "stride": 2},
            {"kind": "avg_pool", "stride": 2},
            {"kind": "dense", "units": 1024, "act": "selu"},
            {"kind": "dense", "units": 1024, "act": "selu"},
            {"kind": "output", "units": 1, "act": "sigmoid"},
        ],
    }


def test_describe_rows_cover_every_layer():
    p = compile_cells([(8, 3, 1, 2)], INPUT)
    rows = describe(p)
    assert len(rows) == len(p.layers)
    assert rows[0] == {"kind": "conv", "filters": 8, "size": 3, "stride": 1,
                       "units": None, "activation": "selu",
                       "out_shape": [62, 62, 8], "params": 80}
    assert sum(row["params"] for row in rows) == param_count(p)


def test_compiler_agrees_with_shape_oracle_on_random_genomes():
    for seed in range(300):
        space = SearchSpace(allow_skip_conv=bool(seed % 2))
        genome = random_genome(space, np.random.default_rng(seed))
        p = decode(genome, space)
        kept, trace, final_shape = simulate_cells(genome.cells(), 64, 64, 1)
        assert p.cells_kept == kept
        assert p.cells_pruned == genome.cell_count - kept
        assert feature_shape(p) == final_shape
        cell_layers = [(layer.kind,) + shape
                       for layer, shape in zip(p.layers, p.shapes)
                       if layer.kind in ("conv", "max_pool")]
        assert cell_layers == trace
        assert param_count(p) == simulate_params(genome.cells(), 64, 64, 1)
        assert conv_layer_count(p) == sum(1 for t in trace if t[0] == "conv")
