"""Numba and numpy kernel implementations must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from fsvdd import _kernels
from fsvdd._backend import NUMBA_ENABLED, backend_name
from fsvdd._kernels import (
    _ead_bwd_np,
    _ead_fwd_np,
    _modrelu_bwd_np,
    _modrelu_fwd_np,
    _smo_solve_np,
)


def random_problem(seed, n=25, dim=4):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
    return np.exp(-0.5 * d2)


class TestSmoParity:
    @pytest.mark.skipif(not NUMBA_ENABLED, reason="numba backend inactive")
    def test_solver_backends_agree(self):
        from fsvdd._kernels import _smo_solve_nb
        for seed in range(5):
            K = random_problem(seed)
            a1, it1, gap1 = _smo_solve_np(K, 1.0, 1e-10, 100_000)
            a2, it2, gap2 = _smo_solve_nb(K, 1.0, 1e-10, 100_000)
            obj1 = a1 @ K @ a1
            obj2 = a2 @ K @ a2
            assert abs(obj1 - obj2) < 1e-12
            np.testing.assert_allclose(a1, a2, atol=1e-9)

    def test_numpy_solver_satisfies_constraints(self):
        K = random_problem(123, n=40)
        a, iters, gap = _smo_solve_np(K, 0.25, 1e-10, 100_000)
        assert abs(a.sum() - 1.0) < 1e-10
        assert np.all(a >= -1e-15) and np.all(a <= 0.25 + 1e-12)
        assert gap <= 1e-10


@pytest.mark.skipif(not NUMBA_ENABLED, reason="numba backend inactive")
class TestActivationParity:
    def setup_method(self):
        rng = np.random.default_rng(7)
        self.z = np.ascontiguousarray(
            rng.standard_normal((40, 16)) + 1j * rng.standard_normal((40, 16)))
        self.g = np.ascontiguousarray(
            rng.standard_normal((40, 16)) + 1j * rng.standard_normal((40, 16)))
        self.b = np.ascontiguousarray(rng.uniform(0.2, 1.5, 16))

    def test_ead_forward(self):
        from fsvdd._kernels import _ead_fwd_nb
        o1, r1, e1 = _ead_fwd_np(self.z, self.b)
        o2, r2, e2 = _ead_fwd_nb(self.z, self.b)
        np.testing.assert_allclose(o1, o2, atol=1e-15)
        np.testing.assert_allclose(r1, r2, atol=1e-15)
        np.testing.assert_allclose(e1, e2, atol=1e-15)

    def test_ead_backward(self):
        from fsvdd._kernels import _ead_bwd_nb, _ead_fwd_nb
        _, r, e = _ead_fwd_nb(self.z, self.b)
        g1, gb1 = _ead_bwd_np(self.g, self.z, r, e, self.b)
        g2, gb2 = _ead_bwd_nb(self.g, self.z, r, e, self.b)
        np.testing.assert_allclose(g1, g2, atol=1e-13)
        np.testing.assert_allclose(gb1, gb2, atol=1e-13)

    def test_modrelu_forward(self):
        from fsvdd._kernels import _modrelu_fwd_nb
        o1, r1 = _modrelu_fwd_np(self.z, self.b)
        o2, r2 = _modrelu_fwd_nb(self.z, self.b)
        np.testing.assert_allclose(o1, o2, atol=1e-15)
        np.testing.assert_allclose(r1, r2, atol=1e-15)

    def test_modrelu_backward(self):
        from fsvdd._kernels import _modrelu_bwd_nb, _modrelu_fwd_nb
        _, r = _modrelu_fwd_nb(self.z, self.b)
        g1, gb1 = _modrelu_bwd_np(self.g, self.z, r, self.b)
        g2, gb2 = _modrelu_bwd_nb(self.g, self.z, r, self.b)
        np.testing.assert_allclose(g1, g2, atol=1e-13)
        np.testing.assert_allclose(gb1, gb2, atol=1e-13)


class TestBackendFlag:
    def test_active_backend_reported(self):
        assert backend_name() in ("numba", "numpy")
        assert (backend_name() == "numba") == NUMBA_ENABLED
        assert _kernels.smo_solve is not None

    def test_env_flag_forces_numpy(self):
        env = dict(os.environ, FSVDD_NUMBA="0")
        out = subprocess.run(
            [sys.executable, "-c",
             "from fsvdd import backend_name; print(backend_name())"],
            capture_output=True, text=True, env=env, check=True)
        assert out.stdout.strip() == "numpy"

    def test_numpy_backend_runs_full_pipeline(self):
        script = (
            "import numpy as np\n"
            "from fsvdd import svdd, complex_nn\n"
            "rng = np.random.default_rng(0)\n"
            "X = rng.standard_normal((12, 5))\n"
            "m, _ = svdd.fit(X, gamma=0.5, C=1.0)\n"
            "assert svdd.decide_batch(m, X).sum() == 0\n"
            "ae = complex_nn.build_autoencoder(5, 'ead', hidden=(4,), seed=0)\n"
            "Z = rng.standard_normal((6, 5)) + 1j*rng.standard_normal((6, 5))\n"
            "out = complex_nn.train(ae, Z, complex_nn.TrainConfig(epochs=3,\n"
            "      learning_rate=1e-3, seed=0))\n"
            "assert out.train_report.final_loss < out.train_report.initial_loss\n"
            "print('ok')\n")
        env = dict(os.environ, FSVDD_NUMBA="0")
        out = subprocess.run([sys.executable, "-c", script],
                             capture_output=True, text=True, env=env,
                             check=True)
        assert out.stdout.strip() == "ok"
