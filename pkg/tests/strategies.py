"""Hypothesis strategies for structured test sequences."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from seqspec import sequences as sq
from seqspec.sequences import Restriction
from seqspec.toeplitz import StructuredToeplitzSequence, Symbol, assemble

from oracles import low_rank, low_rank_hermitian

BLOCK = 6


@st.composite
def restrictions(draw, max_step: int = 4):
    """Arithmetic eta(n) = start + step (n-1) with start <= step <= max_step."""
    step = draw(st.integers(2, max_step))
    start = draw(st.integers(1, step))
    return Restriction.arithmetic(start, step)


@st.composite
def perturbed(draw, max_rank: int = 4):
    """a0 I + K-block (+ L-block) + c/n^p noise; compact when a0 = 0."""
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    a0 = draw(st.sampled_from([0.0, 0.0, 0.75, 1.5]))
    rk = draw(st.integers(0, max_rank))
    rl = draw(st.integers(0, max_rank - rk))
    p = draw(st.sampled_from([1.0, 2.0]))
    c = draw(st.floats(0.0, 0.5))
    noise = sq.scaled_identity(lambda n, c=c, p=p: c / n ** p)
    spec = StructuredToeplitzSequence(Symbol({0: a0} if a0 else {}), low_rank(rng, BLOCK, rk),
                                      low_rank(rng, BLOCK, rl), noise, rk, rl)
    return spec, assemble(spec)


@st.composite
def banded_hermitian(draw, with_block: bool = True):
    """Sections of a real symmetric symbol of degree <= 2, plus a Hermitian block."""
    a0 = draw(st.floats(-1.0, 1.0))
    a1 = draw(st.floats(0.25, 1.25))
    a2 = draw(st.sampled_from([0.0, 0.0, 0.3]))
    coeffs = {0: a0, 1: a1, -1: a1}
    if a2:
        coeffs.update({2: a2, -2: a2})
    block = None
    if with_block and draw(st.booleans()):
        rng = np.random.default_rng(draw(st.integers(0, 2**31)))
        block = low_rank_hermitian(rng, BLOCK, draw(st.integers(1, 3)), 2.5, 4.0)
    spec = StructuredToeplitzSequence(Symbol(coeffs), k_block=block)
    return spec, assemble(spec)
