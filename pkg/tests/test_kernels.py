import os
import subprocess
import sys

import numpy as np
import pytest

from founder_success.ml import BoostParams, ForestParams, GradientBoostedTrees, RandomForest, kernels
from founder_success.ml.models import dumps_model

needs_compiled = pytest.mark.skipif(kernels.compiled_kernels is None, reason="compiled kernel not built")


def case(rng):
    n, d = int(rng.integers(2, 40)), int(rng.integers(1, 6))
    X = np.sort(rng.integers(0, 5, (n, d)).astype(float), axis=0)
    return X, rng.integers(0, 2, (n, d)).astype(float), rng.normal(size=(n, d)), rng.uniform(0.01, 0.25, (n, d))


@needs_compiled
def test_compiled_matches_python_bitwise():
    rng = np.random.default_rng(0)
    c, p = kernels.get("cython"), kernels.get("python")
    for _ in range(300):
        xs, ys, gs, hs = case(rng)
        leaf = int(rng.integers(1, 4))
        assert c.scan_gini(xs, ys, leaf) == p.scan_gini(xs, ys, leaf)
        assert c.scan_newton(xs, gs, hs, 1.0, leaf) == p.scan_newton(xs, gs, hs, 1.0, leaf)


@needs_compiled
def test_models_identical_across_kernels():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(120, 6))
    y = X[:, 0] * X[:, 1] > 0
    for make in (
        lambda k: RandomForest(ForestParams(n_trees=10), kernels=k),
        lambda k: GradientBoostedTrees(BoostParams(n_rounds=20), kernels=k),
    ):
        a = make(kernels.get("cython")).fit(X, y)
        b = make(kernels.get("python")).fit(X, y)
        assert dumps_model(a) == dumps_model(b)


def test_no_valid_split():
    p = kernels.get("python")
    xs = np.ones((5, 2))
    assert p.scan_gini(xs, np.zeros((5, 2)), 1)[0] == -1
    assert p.scan_gini(np.ones((1, 1)), np.ones((1, 1)), 1)[0] == -1


def test_env_forces_fallback():
    code = "from founder_success.ml import kernels; print(kernels.BACKEND)"
    env = {**os.environ, "FS_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_get_unknown():
    with pytest.raises(ValueError):
        kernels.get("fortran")
