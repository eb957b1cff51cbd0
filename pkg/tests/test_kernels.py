import random
import subprocess
import sys

import pytest

from edgesplit import _kernels_py, kernels

try:
    from edgesplit import _kernels as _compiled
except ImportError:
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None,
                                    reason="compiled kernels not built")


def _random_trace(n, seed):
    rng = random.Random(seed)
    t = [0.0]
    for _ in range(n - 1):
        t.append(t[-1] + rng.uniform(1e-4, 0.5))
    p = [rng.uniform(0.0, 40.0) for _ in range(n)]
    return kernels.as_vector(t), kernels.as_vector(p)


def test_backend_is_reported():
    assert kernels.BACKEND in ("compiled", "pure")


def test_as_vector_passes_through_double_arrays():
    vec = kernels.as_vector([1.0, 2.0])
    assert kernels.as_vector(vec) is vec


@needs_compiled
def test_rect_energy_agrees_bit_for_bit():
    for seed in range(5):
        t, p = _random_trace(500, seed)
        assert _compiled.rect_energy(t, p) == _kernels_py.rect_energy(t, p)


@needs_compiled
def test_monotonicity_and_sign_scans_agree():
    t = kernels.as_vector([0.0, 1.0, 1.0, 2.0])
    assert _compiled.first_nonincreasing(t) \
        == _kernels_py.first_nonincreasing(t) == 2
    good = kernels.as_vector([0.0, 1.0, 2.0])
    assert _compiled.first_nonincreasing(good) \
        == _kernels_py.first_nonincreasing(good) == -1
    p = kernels.as_vector([0.5, 0.0, -0.25])
    assert _compiled.first_negative(p) == _kernels_py.first_negative(p) == 2
    assert _compiled.first_negative(kernels.as_vector([0.0])) == -1


@needs_compiled
def test_quadratic_sums_agree():
    rng = random.Random(3)
    x = kernels.as_vector([rng.uniform(0.5, 12.0) for _ in range(200)])
    y = kernels.as_vector([rng.uniform(0.0, 2.0) for _ in range(200)])
    compiled = _compiled.quad_design_sums(x, y)
    pure = _kernels_py.quad_design_sums(x, y)
    assert compiled == pytest.approx(pure, rel=1e-15)
    assert _compiled.quad_sse(x, y, 0.02, -0.2, 1.1) \
        == pytest.approx(_kernels_py.quad_sse(x, y, 0.02, -0.2, 1.1),
                         rel=1e-14)


@needs_compiled
def test_exponential_inner_solve_agrees():
    rng = random.Random(4)
    x = kernels.as_vector(sorted(rng.uniform(0.5, 12.0) for _ in range(64)))
    y = kernels.as_vector([rng.uniform(0.2, 2.0) for _ in range(64)])
    for rate in (0.01, 0.1, 1.0, 5.0, 10.0):
        compiled = _compiled.exp_solve_at_rate(x, y, rate)
        pure = _kernels_py.exp_solve_at_rate(x, y, rate)
        assert compiled == pytest.approx(pure, rel=1e-12)


@needs_compiled
def test_degenerate_rate_collapses_to_flat_fit_in_both():
    x = kernels.as_vector([100.0, 200.0, 300.0, 400.0])
    y = kernels.as_vector([1.0, 2.0, 3.0, 4.0])
    # exp(-10 * 100) underflows: both paths must take the flat branch
    compiled = _compiled.exp_solve_at_rate(x, y, 10.0)
    pure = _kernels_py.exp_solve_at_rate(x, y, 10.0)
    assert compiled == pure
    assert compiled[0] == 0.0
    assert compiled[1] == pytest.approx(2.5)


@needs_compiled
def test_spin_returns_identical_checksums():
    assert _compiled.spin(10_000) == _kernels_py.spin(10_000)
    assert _compiled.spin(0) == 0.0


def test_forcing_the_pure_backend_via_environment():
    import os

    script = "import edgesplit.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, EDGESPLIT_PURE="1")
    out = subprocess.run([sys.executable, "-c", script], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "pure"


def test_pure_rect_energy_left_rectangle_semantics():
    t = [0.0, 1.0, 3.0]
    p = [2.0, 4.0, 100.0]  # final sample contributes nothing
    assert _kernels_py.rect_energy(t, p) == 2.0 * 1.0 + 4.0 * 2.0
