import copy
from pathlib import Path

import pytest

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

RELAX = {
    "name": "small-relax",
    "kind": "relax",
    "mesh": {"dim": 1, "lengths": [1.0], "counts": [16]},
    "model": {"alpha_n": 1.5, "alpha_p": 1.5, "alpha_d": 1.5, "debye_length": 0.5},
    "boundary": {
        "contacts": {
            "left": {"n_d": 1.0, "p_d": 1.0, "v_d": 0.0},
            "right": {"n_d": 1.0, "p_d": 1.0, "v_d": 1.0},
        }
    },
    "initial": {
        "n": {"kind": "constant", "value": 1.0},
        "p": {"kind": "constant", "value": 1.0},
        "d": {"kind": "step", "left": 1.0, "right": 0.2, "position": 0.4},
    },
    "stepper": {"dt": 1e-3, "t_end": 0.01, "newton_tol": 1e-11},
    "output": {"record_every": 2, "snapshot_times": [0.005], "lq_exponents": [2, 4]},
}


@pytest.fixture
def relax_data():
    """A small contact-driven relaxation scenario as a plain dict."""
    return copy.deepcopy(RELAX)


@pytest.fixture
def scenario_dir():
    return SCENARIOS
