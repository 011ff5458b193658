"""Hypothesis strategies wrapping the seeded generators."""

import numpy as np
from hypothesis import strategies as st

import generators as gen

seeds = st.integers(0, 2**32 - 1)


def _from(fn, **kw):
    return seeds.map(lambda s: fn(np.random.default_rng(s), **kw))


general_specs = _from(gen.random_general_spec)
structured_specs = _from(gen.random_structured_spec)
diagonalizable_specs = _from(gen.random_diagonalizable_spec)
chain_specs = _from(gen.random_chain_corollary_spec)
pairs = _from(gen.random_pair)
