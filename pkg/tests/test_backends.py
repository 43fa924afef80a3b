"""The compiled kernels and the NumPy fallback must agree numerically."""

import numpy as np
import pytest

from hquant import _backend, _reference

pytestmark = pytest.mark.skipif(
    not _backend.HAVE_COMPILED, reason="compiled extension not built"
)

from hquant import _core  # noqa: E402  (import only exercised when built)


def test_forward_agreement():
    rng = np.random.default_rng(0)
    for k in (1, 2, 7, 16, 64):
        v = rng.standard_normal((k, k))
        x = rng.standard_normal((23, k))
        xc, xr = x.copy(), x.copy()
        _core.apply_reflections(v, xc)
        _reference.apply_reflections(v, xr)
        assert np.allclose(xc, xr, atol=1e-12)


def test_record_and_backprop_agreement():
    rng = np.random.default_rng(1)
    for k in (3, 16, 32):
        v = rng.standard_normal((k, k))
        x = rng.standard_normal((17, k))
        g = rng.standard_normal((17, k))
        ac = _core.record_reflections(v, x)
        ar = _reference.record_reflections(v, x)
        assert np.allclose(ac, ar, atol=1e-12)
        vc, gc = _core.backprop_reflections(v, ac, g)
        vr, gr = _reference.backprop_reflections(v, ar, g)
        assert np.allclose(vc, vr, atol=1e-11)
        assert np.allclose(gc, gr, atol=1e-12)


def test_hamming_agreement():
    rng = np.random.default_rng(2)
    for nb, mask in ((1, 0xF0), (8, 0xFF), (9, 0x80)):
        q = rng.integers(0, 256, nb, dtype=np.uint8)
        db = rng.integers(0, 256, (500, nb), dtype=np.uint8)
        assert np.array_equal(
            _core.hamming_counts(q, db, mask), _reference.hamming_counts(q, db, mask)
        )


def test_forced_fallback_env(tmp_path):
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import hquant; print(hquant.BACKEND_NAME)"],
        env={"HQUANT_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
    )
    assert out.stdout.strip() == "numpy"
