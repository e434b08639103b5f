"""Token vocabulary and one-hot array plumbing for SELFIES sequences.

The vocabulary is immutable and deterministic: reserved tokens first, then
the corpus tokens in lexicographic order, so any iteration order of the
same corpus yields the same table.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .chem.selfies import split_selfies

__all__ = [
    "PAD_TOKEN",
    "EOS_TOKEN",
    "TokenVocab",
    "EncodedMolecule",
    "OneHotBatch",
    "VocabError",
    "SequenceLengthError",
    "build_vocab",
    "tokenize",
    "encode_onehot",
    "decode_logits",
]

PAD_TOKEN = "<pad>"
EOS_TOKEN = "<eos>"


class VocabError(ValueError):
    pass


class SequenceLengthError(ValueError):
    pass


@dataclass(frozen=True)
class TokenVocab:
    tokens: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise VocabError("duplicate tokens in vocabulary")
        if self.tokens[:2] != (PAD_TOKEN, EOS_TOKEN):
            raise VocabError("vocabulary must start with the reserved PAD, EOS tokens")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def eos_id(self) -> int:
        return 1

    def index_of(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise VocabError(f"token {token!r} not in vocabulary") from None

    def token_of(self, idx: int) -> str:
        return self.tokens[idx]

    def sha256(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode()).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self.tokens:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path) -> "TokenVocab":
        with open(path, encoding="utf-8") as fh:
            return cls(tuple(line.rstrip("\n") for line in fh if line.strip()))


def build_vocab(corpus: Iterable[str]) -> TokenVocab:
    """Vocabulary over every token appearing in the corpus, reserved first.

    Raises VocabError on an empty corpus and propagates the parse error for
    strings with unbalanced brackets (naming the offending string).
    """
    seen: set[str] = set()
    empty = True
    for selfies in corpus:
        empty = False
        seen.update(split_selfies(selfies))
    if empty:
        raise VocabError("cannot build a vocabulary from an empty corpus")
    return TokenVocab((PAD_TOKEN, EOS_TOKEN) + tuple(sorted(seen)))


@dataclass(frozen=True)
class EncodedMolecule:
    """Token ids of one molecule: chemical tokens followed by exactly one EOS."""

    token_ids: tuple[int, ...]
    source_selfies: str

    def __post_init__(self):
        if not self.token_ids or self.token_ids[-1] != 1:
            raise VocabError(f"encoded molecule must end with EOS: {self.source_selfies!r}")
        if any(t in (0, 1) for t in self.token_ids[:-1]):
            raise VocabError(f"reserved token inside sequence: {self.source_selfies!r}")


def tokenize(selfies: str, vocab: TokenVocab) -> EncodedMolecule:
    """Map a SELFIES string to ids + EOS. Unknown tokens are a hard error:
    silently skipping them would corrupt downstream correlation analysis."""
    ids = []
    for tok in split_selfies(selfies):
        if tok not in vocab.tokens:
            raise VocabError(f"unknown token {tok!r} in {selfies!r}")
        ids.append(vocab.index_of(tok))
    return EncodedMolecule(tuple(ids) + (vocab.eos_id,), selfies)


@dataclass(frozen=True)
class OneHotBatch:
    """Batch of one-hot token arrays, shape (d, M, N)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError(f"one-hot batch must be 3-d, got shape {self.data.shape}")

    @property
    def shape(self):
        return self.data.shape

    def token_ids(self) -> np.ndarray:
        return self.data.argmax(axis=1)


def encode_onehot(batch: Sequence[EncodedMolecule], vocab: TokenVocab, max_len: int) -> OneHotBatch:
    """Pad each sequence to max_len and one-hot encode to (d, M, N).

    Sequences longer than max_len are rejected, not truncated.
    """
    data = np.zeros((len(batch), vocab.size, max_len), dtype=np.float32)
    for i, mol in enumerate(batch):
        ids = mol.token_ids
        if len(ids) > max_len:
            raise SequenceLengthError(
                f"sample {i} ({mol.source_selfies!r}) has {len(ids)} tokens "
                f"(with EOS), limit is {max_len}"
            )
        for j, t in enumerate(ids):
            data[i, t, j] = 1.0
        data[i, vocab.pad_id, len(ids):] = 1.0
    return OneHotBatch(data)


def ids_to_selfies(ids: Sequence[int], vocab: TokenVocab) -> str:
    """Concatenate chemical tokens, stopping at the first EOS; PAD is skipped."""
    out = []
    for t in ids:
        if t == vocab.eos_id:
            break
        if t == vocab.pad_id:
            continue
        out.append(vocab.token_of(int(t)))
    return "".join(out)


def decode_logits(
    logits: np.ndarray,
    vocab: TokenVocab,
    mode: str = "argmax",
    temperature: float = 1.0,
    rng: np.random.Generator | None = None,
) -> list[str]:
    """Read SELFIES strings off a (d, M, N) logits array.

    argmax breaks ties toward the lowest index; sample draws each position
    from softmax(logits / temperature). A sequence with no EOS within N is
    cut at N (the codec decodes any prefix).
    """
    logits = np.asarray(logits)
    if logits.ndim != 3 or logits.shape[1] != vocab.size:
        raise ValueError(f"expected (d, {vocab.size}, N) logits, got {logits.shape}")
    if mode == "argmax":
        ids = logits.argmax(axis=1)
    elif mode == "sample":
        if temperature <= 0:
            raise ValueError("temperature must be > 0 in sample mode")
        if rng is None:
            raise ValueError("sample mode needs an rng")
        scaled = logits / temperature
        scaled = scaled - scaled.max(axis=1, keepdims=True)
        probs = np.exp(scaled)
        probs /= probs.sum(axis=1, keepdims=True)
        cum = probs.cumsum(axis=1)
        u = rng.random((logits.shape[0], 1, logits.shape[2]))
        ids = (cum < u).sum(axis=1)
        np.clip(ids, 0, vocab.size - 1, out=ids)
    else:
        raise ValueError(f"unknown decode mode {mode!r}")
    return [ids_to_selfies(row, vocab) for row in ids]
