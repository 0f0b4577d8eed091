import numpy as np
import pytest

from reinflect import autodiff as ad


def finite_difference_grads(build_loss, leaves, h=1e-5):
    """Central-difference gradients of a rebuilt scalar graph.

    `build_loss` must reconstruct the graph from the given leaf nodes each
    call; leaf values are perturbed in place.
    """
    grads = []
    for lf in leaves:
        arr = lf.value
        flat = arr.ravel()
        g = np.zeros_like(arr)
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = float(build_loss().value)
            flat[i] = orig - h
            fm = float(build_loss().value)
            flat[i] = orig
            gflat[i] = (fp - fm) / (2.0 * h)
        grads.append(g)
    return grads


def assert_grads_match(build_loss, leaves, tol=1e-6, h=1e-5):
    """Compare autodiff gradients of `build_loss` against finite differences.

    Per-element criterion: |ad - fd| / max(1, |fd|) <= tol.
    """
    for lf in leaves:
        lf.grad = None
    loss = build_loss()
    ad.backward(loss)
    ad_grads = [lf.grad if lf.grad is not None else np.zeros_like(lf.value)
                for lf in leaves]
    fd_grads = finite_difference_grads(build_loss, leaves, h=h)
    for i, (got, want) in enumerate(zip(ad_grads, fd_grads)):
        rel = np.abs(got - want) / np.maximum(1.0, np.abs(want))
        assert rel.max() <= tol, (
            f"gradient mismatch on leaf {i}: max rel err {rel.max():.3g}"
        )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
