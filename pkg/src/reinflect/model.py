"""The full character-level reinflection model.

Assembles vocabulary handling, the joint supervised + autoencoding loss, and a
versioned binary parameter file with bit-exact round-trips.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Node
from .errors import (
    DataError,
    InputError,
    ModelChecksumError,
    ModelTruncatedError,
    ModelVersionError,
)
from .layers import AttentionParams, GruCellParams, attend, decoder_step, encode

# Marker symbols.  Multi-character spellings so they can never collide with
# alphabet characters.
BOS = "<B>"
EOS = "<E>"
AUTO = "<A>"
UNK = "<UNK>"

CLASS_MARKER = "marker"
CLASS_SUBTAG = "subtag"
CLASS_CHAR = "char"

MAGIC = b"RINFLMD1"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class LabeledExample:
    """A reinflection triple: source form, target tag (subtags), target form."""

    source_form: str
    target_tag: tuple[str, ...]
    target_form: str


@dataclass(frozen=True)
class UnlabeledExample:
    """A plain corpus word (or random string) for the autoencoding task."""

    word: str


class Vocabulary:
    """Bijection between symbols and contiguous ids.

    Input symbols: markers B/E/A/UNK, then subtags, then characters.
    Output symbols: E plus the characters, in the same relative order.
    """

    def __init__(self, symbols: list[str], classes: list[str]):
        if len(symbols) != len(set(symbols)):
            raise DataError("vocabulary symbols must be distinct")
        self.symbols = list(symbols)
        self.classes = list(classes)
        self.index = {s: i for i, s in enumerate(symbols)}
        for marker in (BOS, EOS, AUTO, UNK):
            if marker not in self.index:
                raise DataError(f"vocabulary is missing marker {marker}")
        self.out_symbols = [EOS] + [
            s for s, c in zip(symbols, classes) if c == CLASS_CHAR
        ]
        self.out_index = {s: i for i, s in enumerate(self.out_symbols)}
        # output id -> input id of the same symbol (feeds decoder embeddings)
        self.out_to_in = [self.index[s] for s in self.out_symbols]
        self.eos_out = 0

    @classmethod
    def build(cls, chars, subtags) -> "Vocabulary":
        chars = sorted(set(chars))
        subtags = sorted(set(subtags))
        symbols = [BOS, EOS, AUTO, UNK] + subtags + chars
        classes = ([CLASS_MARKER] * 4 + [CLASS_SUBTAG] * len(subtags)
                   + [CLASS_CHAR] * len(chars))
        return cls(symbols, classes)

    def __len__(self):
        return len(self.symbols)

    @property
    def n_out(self):
        return len(self.out_symbols)

    def char_id(self, ch: str) -> int:
        return self.index.get(ch, self.index[UNK])

    def subtag_id(self, tag: str) -> int:
        return self.index.get(tag, self.index[UNK])


def encode_input(vocab: Vocabulary, ex) -> list[int]:
    """Input ids: B tag* chars E for labeled, B A chars E for unlabeled.

    Symbols outside the vocabulary map to UNK.
    """
    if isinstance(ex, LabeledExample):
        ids = [vocab.index[BOS]]
        ids.extend(vocab.subtag_id(t) for t in ex.target_tag)
        ids.extend(vocab.char_id(c) for c in ex.source_form)
    elif isinstance(ex, UnlabeledExample):
        ids = [vocab.index[BOS], vocab.index[AUTO]]
        ids.extend(vocab.char_id(c) for c in ex.word)
    else:
        raise TypeError(f"encode_input: unsupported example type {type(ex)!r}")
    ids.append(vocab.index[EOS])
    return ids


def target_ids(vocab: Vocabulary, form: str) -> list[int]:
    """Output ids of a gold form: its characters then E.

    A gold character outside the alphabet is a data fault, not an UNK case.
    """
    ids = []
    for ch in form:
        if ch not in vocab.out_index:
            raise DataError(f"target form contains unknown character {ch!r}")
        ids.append(vocab.out_index[ch])
    ids.append(vocab.eos_out)
    return ids


@dataclass
class Hyperparams:
    embed_dim: int = 300
    hidden: int = 100
    attn_dim: int = 100

    def to_dict(self):
        return {"embed_dim": self.embed_dim, "hidden": self.hidden,
                "attn_dim": self.attn_dim}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class ModelParameters:
    """All trainable weights, shared between the MRI and autoencoding tasks."""

    vocab: Vocabulary
    hp: Hyperparams
    embed: Node
    enc_fwd: GruCellParams
    enc_bwd: GruCellParams
    dec: GruCellParams
    attn: AttentionParams
    init_w: Node
    init_b: Node
    out_w: Node
    out_b: Node

    @classmethod
    def init(cls, vocab: Vocabulary, hp: Hyperparams,
             rng: np.random.Generator) -> "ModelParameters":
        d_e, d_h, d_a = hp.embed_dim, hp.hidden, hp.attn_dim
        return cls(
            vocab=vocab,
            hp=hp,
            embed=ad.leaf(rng.uniform(-0.1, 0.1, size=(len(vocab), d_e))),
            enc_fwd=GruCellParams.init(d_e, d_h, rng),
            enc_bwd=GruCellParams.init(d_e, d_h, rng),
            dec=GruCellParams.init(d_e + 2 * d_h, d_h, rng),
            attn=AttentionParams.init(d_h, d_h, d_a, rng),
            init_w=ad.leaf(rng.uniform(-0.1, 0.1, size=(d_h, d_h))),
            init_b=ad.leaf(np.zeros(d_h)),
            out_w=ad.leaf(rng.uniform(-0.1, 0.1, size=(d_h + 2 * d_h + d_e, vocab.n_out))),
            out_b=ad.leaf(np.zeros(vocab.n_out)),
        )

    def named_parameters(self) -> list[tuple[str, Node]]:
        """All parameter nodes in a fixed, serialization-stable order."""
        named: list[tuple[str, Node]] = [("embed", self.embed)]
        named.extend(self.enc_fwd.named_nodes("enc_fwd"))
        named.extend(self.enc_bwd.named_nodes("enc_bwd"))
        named.extend(self.dec.named_nodes("dec"))
        named.extend(self.attn.named_nodes("attn"))
        named.extend([("init_w", self.init_w), ("init_b", self.init_b),
                      ("out_w", self.out_w), ("out_b", self.out_b)])
        return named

    def parameters(self) -> list[Node]:
        return [n for _, n in self.named_parameters()]

    def zero_grads(self) -> None:
        ad.zero_grads(self.parameters())

    def copy(self) -> "ModelParameters":
        """Deep copy of all tensors (vocabulary and hyperparams shared)."""
        clone = ModelParameters.init(self.vocab, self.hp, np.random.default_rng(0))
        for (_, src), (_, dst) in zip(self.named_parameters(), clone.named_parameters()):
            dst.value = src.value.copy()
            dst.grad = None
        return clone


def init_decoder_state(model: ModelParameters, h0: Node) -> Node:
    """Initial decoder state from the backward encoder state at position 0."""
    d_h = model.hp.hidden
    h_bwd_first = ad.narrow(h0, d_h, d_h)
    return ad.tanh(ad.affine(h_bwd_first, model.init_w, model.init_b))


def encode_sequence(model: ModelParameters, input_ids: list[int]) -> tuple[Node, Node]:
    """Run the encoder; returns (stacked encoder states, initial decoder state)."""
    if not input_ids:
        raise InputError("encode_sequence: empty input")
    xs = [ad.lookup(model.embed, i) for i in input_ids]
    hs = encode(model.enc_fwd, model.enc_bwd, xs)
    h_mat = ad.stack(hs)
    s0 = init_decoder_state(model, hs[0])
    return h_mat, s0


def example_nll(model: ModelParameters, input_ids: list[int],
                target_out_ids: list[int]) -> Node:
    """Teacher-forced negative log-likelihood of one example."""
    if not input_ids or not target_out_ids:
        raise InputError("example_nll: empty input or target sequence")
    h_mat, s = encode_sequence(model, input_ids)
    y_emb = ad.lookup(model.embed, model.vocab.index[BOS])
    loss = None
    for t in target_out_ids:
        s, dist = decoder_step(model.dec, model.attn, model.out_w, model.out_b,
                               s, y_emb, h_mat)
        term = ad.neg_log_pick(dist, t)
        loss = term if loss is None else ad.add(loss, term)
        if t != model.vocab.eos_out:
            y_emb = ad.lookup(model.embed, model.vocab.out_to_in[t])
    return loss


def batch_loss(model: ModelParameters, batch) -> Node:
    """Sum of per-example losses over a mixed labeled/unlabeled batch."""
    if not batch:
        raise InputError("batch_loss: empty batch")
    vocab = model.vocab
    total = None
    for ex in batch:
        ids = encode_input(vocab, ex)
        gold = ex.target_form if isinstance(ex, LabeledExample) else ex.word
        nll = example_nll(model, ids, target_ids(vocab, gold))
        total = nll if total is None else ad.add(total, nll)
    return total


# ---------------------------------------------------------------------------
# Serialization: MAGIC | version u32 | manifest_len u64 | manifest JSON |
# raw row-major little-endian float64 tensors | sha256 of everything before.
# ---------------------------------------------------------------------------

def save(model: ModelParameters, path) -> None:
    named = model.named_parameters()
    manifest = {
        "hyperparams": model.hp.to_dict(),
        "vocab": {"symbols": model.vocab.symbols, "classes": model.vocab.classes},
        "tensors": [{"name": name, "shape": list(node.value.shape)}
                    for name, node in named],
    }
    manifest_bytes = json.dumps(manifest, ensure_ascii=False).encode("utf-8")
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    buf.write(struct.pack("<Q", len(manifest_bytes)))
    buf.write(manifest_bytes)
    for _, node in named:
        buf.write(np.ascontiguousarray(node.value, dtype="<f8").tobytes())
    payload = buf.getvalue()
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as f:
        f.write(payload)
        f.write(digest)


def load(path) -> ModelParameters:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(MAGIC) + 4 + 8 + 32:
        raise ModelTruncatedError(f"model file too short: {len(blob)} bytes")
    payload, digest = blob[:-32], blob[-32:]
    if payload[:len(MAGIC)] != MAGIC:
        raise ModelVersionError("bad magic bytes; not a model file")
    if hashlib.sha256(payload).digest() != digest:
        raise ModelChecksumError("model file checksum mismatch")
    off = len(MAGIC)
    (version,) = struct.unpack_from("<I", payload, off)
    off += 4
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format version {version}")
    (mlen,) = struct.unpack_from("<Q", payload, off)
    off += 8
    if off + mlen > len(payload):
        raise ModelTruncatedError("manifest extends past end of file")
    manifest = json.loads(payload[off:off + mlen].decode("utf-8"))
    off += mlen

    vocab = Vocabulary(manifest["vocab"]["symbols"], manifest["vocab"]["classes"])
    hp = Hyperparams.from_dict(manifest["hyperparams"])
    model = ModelParameters.init(vocab, hp, np.random.default_rng(0))
    by_name = dict(model.named_parameters())
    for spec in manifest["tensors"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if off + nbytes > len(payload):
            raise ModelTruncatedError(f"tensor {spec['name']} extends past end of file")
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=off)
        off += nbytes
        node = by_name.get(spec["name"])
        if node is None or node.value.shape != shape:
            raise ModelVersionError(
                f"unexpected tensor {spec['name']} with shape {shape}"
            )
        node.value = arr.reshape(shape).astype(np.float64).copy()
        node.grad = None
    if off != len(payload):
        raise ModelTruncatedError("trailing bytes after declared tensors")
    return model
