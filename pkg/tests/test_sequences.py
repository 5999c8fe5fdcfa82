import numpy as np
import pytest

from builders import random_flat
from dirackit.sequences import (
    DiracSequence,
    Kind,
    SequenceError,
    block_symplectic_ascending,
    coherence_report,
    locate_levels,
    product_projective,
    validate,
)


@pytest.mark.parametrize("links, depth, levels, ambiguous", [
    ([], 5, [], []),
    ([1], 5, [1], []),
    ([4], 5, [5], []),
    ([2, 3], 5, [3], []),
    ([1, 2, 3, 4], 5, [2, 4], []),
    ([2], 5, [], [[2, 3]]),
])
def test_locate_levels(links, depth, levels, ambiguous):
    out = locate_levels(links, depth)
    assert out["violating_levels"] == levels
    assert out["ambiguous_levels"] == ambiguous


def test_block_symplectic_sequence_is_coherent():
    rep = coherence_report(block_symplectic_ascending(5))
    assert rep["validated"] and rep["coherent"]
    assert [lv["dim_L"] for lv in rep["levels"]] == [2, 4, 6, 8, 10]
    assert rep["max_omega_residual"] <= 1e-12


def test_product_sequence_is_coherent_and_notes_orientation():
    seq = product_projective(5)
    val = validate(seq)
    assert val["valid"] and "note" in val
    assert coherence_report(seq)["coherent"]


def test_link_shape_is_checked():
    seq = block_symplectic_ascending(3)
    with pytest.raises(SequenceError):
        DiracSequence(Kind.ASCENDING, seq.levels, [np.eye(2), np.eye(4)])


def test_strict_coherence_refuses_invalid_sequence():
    seq = block_symplectic_ascending(4)
    levels = list(seq.levels)
    levels[1] = random_flat(np.random.default_rng(1), levels[1].space)
    bad = DiracSequence(seq.kind, levels, seq.links)
    with pytest.raises(SequenceError):
        coherence_report(bad)
    loose = coherence_report(bad, strict=False)
    assert not loose["coherent"]
    assert validate(bad)["violating_levels"] == [2]


def test_prefix_keeps_validity():
    seq = product_projective(5).prefix(3)
    assert seq.depth == 3 and validate(seq)["valid"]
