import numpy as np
import pytest

from flockbench import FlockConfiguration

# Row spacing chosen so 3.5**2 + HEX_DY**2 == 49.0 holds exactly in float64;
# every neighbor distance in the patch below then computes to exactly 7.0.
HEX_DY = float.fromhex("0x1.83fab8b4d4315p+2")


def hexagonal_patch(rows: int = 3, cols: int = 4, d: float = 7.0) -> np.ndarray:
    """Triangular-lattice patch with nearest-neighbor spacing exactly d=7."""
    assert d == 7.0, "row spacing constant is specific to d = 7"
    points = []
    for j in range(rows):
        x0 = 0.5 * d if j % 2 else 0.0
        for i in range(cols):
            points.append((x0 + i * d, j * HEX_DY))
    return np.array(points)


def random_config(rng, n=None, span=20.0, v_span=5.0, dim=2) -> FlockConfiguration:
    n = n or int(rng.integers(2, 12))
    pos = rng.uniform(-span, span, (n, dim))
    vel = rng.uniform(-v_span, v_span, (n, dim))
    return FlockConfiguration(pos, vel)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240817)
