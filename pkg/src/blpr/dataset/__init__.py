"""Label vocabulary, dataset loading and the synthetic glyph generator."""

from ..vocab import NUM_CLASSES, TOKEN_INDEX, VOCAB, class_index, transliterate
from .loader import (
    SPLITS,
    Dataset,
    LabeledGlyph,
    SplitCounts,
    load_dataset,
    synth_glyphs,
    write_dataset,
)
from .synth import PROTOTYPES, SyntheticPlate, random_plate_tokens, render_glyph, render_plate

__all__ = [
    "NUM_CLASSES", "PROTOTYPES", "SPLITS", "TOKEN_INDEX", "VOCAB", "Dataset", "LabeledGlyph",
    "SplitCounts", "SyntheticPlate", "class_index", "load_dataset", "random_plate_tokens",
    "render_glyph", "render_plate", "synth_glyphs", "transliterate", "write_dataset",
]
