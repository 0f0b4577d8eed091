"""Neural building blocks: GRU cell, bidirectional encoder, additive attention,
and the attentional decoder step.

All functions are pure in (parameters, inputs) and operate on autodiff Nodes,
so both training and inference go through the same code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Node
from .errors import InputError

INIT_SCALE = 0.1  # uniform(-0.1, 0.1) weight init; biases start at zero


def _init_weight(rng: np.random.Generator, *shape: int) -> Node:
    return ad.leaf(rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape))


@dataclass
class GruCellParams:
    """Weights of one GRU cell: z/r/h gates, input and recurrent halves."""

    w_z: Node
    w_r: Node
    w_h: Node
    u_z: Node
    u_r: Node
    u_h: Node
    b_z: Node
    b_r: Node
    b_h: Node

    @classmethod
    def init(cls, d_in: int, d_h: int, rng: np.random.Generator) -> "GruCellParams":
        return cls(
            w_z=_init_weight(rng, d_in, d_h),
            w_r=_init_weight(rng, d_in, d_h),
            w_h=_init_weight(rng, d_in, d_h),
            u_z=_init_weight(rng, d_h, d_h),
            u_r=_init_weight(rng, d_h, d_h),
            u_h=_init_weight(rng, d_h, d_h),
            b_z=ad.leaf(np.zeros(d_h)),
            b_r=ad.leaf(np.zeros(d_h)),
            b_h=ad.leaf(np.zeros(d_h)),
        )

    def named_nodes(self, prefix: str):
        for name in ("w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h"):
            yield f"{prefix}.{name}", getattr(self, name)


@dataclass
class AttentionParams:
    """Additive attention: score_i = v . tanh(s_prev @ w_s + h_i @ u_h)."""

    w_s: Node  # [d_h_dec, d_a]
    u_h: Node  # [2*d_h_enc, d_a]
    v: Node    # [d_a]

    @classmethod
    def init(cls, d_h_dec: int, d_h_enc: int, d_a: int, rng: np.random.Generator) -> "AttentionParams":
        return cls(
            w_s=_init_weight(rng, d_h_dec, d_a),
            u_h=_init_weight(rng, 2 * d_h_enc, d_a),
            v=_init_weight(rng, d_a),
        )

    def named_nodes(self, prefix: str):
        for name in ("w_s", "u_h", "v"):
            yield f"{prefix}.{name}", getattr(self, name)


def gru_step(p: GruCellParams, h_prev: Node, x: Node) -> Node:
    """One GRU transition:

    z = sigmoid(x W_z + h U_z + b_z)
    r = sigmoid(x W_r + h U_r + b_r)
    h~ = tanh(x W_h + (r * h) U_h + b_h)
    h' = (1 - z) * h + z * h~
    """
    z = ad.sigmoid(ad.dual_affine(x, p.w_z, h_prev, p.u_z, p.b_z))
    r = ad.sigmoid(ad.dual_affine(x, p.w_r, h_prev, p.u_r, p.b_r))
    h_cand = ad.tanh(ad.dual_affine(x, p.w_h, ad.mul(r, h_prev), p.u_h, p.b_h))
    return ad.lerp(z, h_prev, h_cand)


def encode(fwd: GruCellParams, bwd: GruCellParams, xs: list[Node]) -> list[Node]:
    """Bidirectional encoding; position i is concat(fwd state i, bwd state i).

    Both directions start from zero hidden states.
    """
    if not xs:
        raise InputError("encode: empty input sequence")
    d_h = fwd.b_z.value.shape[0]
    h = ad.leaf(np.zeros(d_h))
    fwd_states = []
    for x in xs:
        h = gru_step(fwd, h, x)
        fwd_states.append(h)
    h = ad.leaf(np.zeros(d_h))
    bwd_states = [None] * len(xs)
    for i in range(len(xs) - 1, -1, -1):
        h = gru_step(bwd, h, xs[i])
        bwd_states[i] = h
    return [ad.concat(f, b) for f, b in zip(fwd_states, bwd_states)]


def attend(p: AttentionParams, s_prev: Node, h_mat: Node) -> tuple[Node, Node]:
    """Context vector and attention weights over encoder states.

    `h_mat` is the stacked encoder output, one row per input position
    (use `autodiff.stack` on the `encode` result).
    """
    if h_mat.value.ndim != 2 or h_mat.value.shape[0] == 0:
        raise InputError("attend: need a nonempty matrix of encoder states")
    s_proj = ad.matmul(s_prev, p.w_s)
    scores = ad.matmul(ad.tanh(ad.add_rowvec(ad.matmul(h_mat, p.u_h), s_proj)), p.v)
    alpha = ad.softmax(scores)
    c = ad.matmul(alpha, h_mat)
    return c, alpha


def decoder_step(
    dec: GruCellParams,
    att: AttentionParams,
    out_w: Node,
    out_b: Node,
    s_prev: Node,
    y_prev_emb: Node,
    h_mat: Node,
) -> tuple[Node, Node]:
    """One decoding step: new state and the output distribution.

    dist = softmax(concat(s_t, c_t, y_prev_emb) @ out_w + out_b)
    """
    c, _alpha = attend(att, s_prev, h_mat)
    s = gru_step(dec, s_prev, ad.concat(y_prev_emb, c))
    readout = ad.concat(ad.concat(s, c), y_prev_emb)
    dist = ad.softmax(ad.affine(readout, out_w, out_b))
    return s, dist
