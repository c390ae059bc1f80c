import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.stats import entropy as scipy_entropy

from addicone import _kernels
from addicone._kernels import _fallback


def _random_input(shape, seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.full(int(np.prod(shape)), 0.5)).reshape(shape)
    p[p < 1e-3] = 0
    p /= p.sum()
    idx = np.argwhere(p > 0)
    return idx.astype(np.int64), p[tuple(idx.T)], np.array(shape, dtype=np.int64), p


@pytest.mark.parametrize("shape", [(2, 2), (2, 3, 2), (4, 2, 2, 2, 2)])
def test_fallback_matches_scipy(shape):
    o, pr, rad, p = _random_input(shape, 1)
    out = _fallback.subset_entropies(o, pr, rad)
    n = len(shape)
    for mask in range(1, 1 << n):
        drop = tuple(i for i in range(n) if not (mask >> i) & 1)
        m = p.sum(axis=drop) if drop else p
        assert abs(out[mask] - scipy_entropy(m.ravel(), base=2)) < 1e-10


def test_backend_is_selected():
    assert _kernels.BACKEND in ("cython", "python")


@pytest.mark.skipif(_kernels.BACKEND != "cython", reason="extension not built")
@pytest.mark.parametrize("seed", range(5))
def test_compiled_matches_fallback(seed):
    from addicone._kernels import _ckernels

    o, pr, rad, _ = _random_input((3, 2, 2, 2, 2), seed)
    assert np.allclose(_ckernels.subset_entropies(o, pr, rad), _fallback.subset_entropies(o, pr, rad), atol=1e-12)


def test_pure_python_switch():
    code = "import addicone._kernels as k; print(k.BACKEND)"
    env = dict(os.environ, ADDICONE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
