"""The 17-class label vocabulary and its plate-string transliteration."""

from __future__ import annotations

from .errors import LabelOutOfRangeError

DIGITS = tuple(str(d) for d in range(10))
LETTERS = ("ka", "ga", "jha", "la")
CITIES = ("dhaka", "narayanganj", "metro")

# index order is part of the model file format; never reorder
VOCAB: tuple[str, ...] = DIGITS + LETTERS + CITIES
NUM_CLASSES = len(VOCAB)
TOKEN_INDEX = {tok: i for i, tok in enumerate(VOCAB)}

# plate strings spell the metro word "matro"
_TRANSLIT = {"metro": "matro"}


def class_index(token: str) -> int:
    try:
        return TOKEN_INDEX[token]
    except KeyError:
        raise LabelOutOfRangeError(f"unknown class token {token!r}") from None


def transliterate(label: int) -> str:
    if not 0 <= int(label) < NUM_CLASSES:
        raise LabelOutOfRangeError(f"label {label} outside [0, {NUM_CLASSES})")
    tok = VOCAB[int(label)]
    return _TRANSLIT.get(tok, tok)
