"""Stable and semi-stable simple / weighted random sampling for samples that
are refreshed every period."""
from .keys import es_order_key, new_seed, refresh_hash, sample_hash
from .sampler import (
    KeyedItem,
    Mode,
    PopulationSnapshot,
    Sample,
    SamplerState,
    SamplingPolicy,
    Variant,
    advance_period,
    draw_sample,
    effective_uniform,
    init_state,
    replace_random_subset_baseline,
)

__version__ = "0.1.0"
