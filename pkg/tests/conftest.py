import numpy as np
import pytest

import posesynth as ps
from posesynth.layouts import JointLayout, validate_layout


@pytest.fixture(scope="session")
def h36m():
    return ps.get_layout("h36m17")


@pytest.fixture(scope="session")
def smpl():
    return ps.get_layout("smpl24")


def make_tiny_layout() -> JointLayout:
    """Five joints: root -> spine -> neck -> {head, collar}.

    Small enough to hand-check bins and frames, but still has a grandparent
    chain and a branching joint.
    """
    bones = np.array([0.5, 0.25, 0.15, 0.2])
    limits = np.zeros((4, 3, 2))
    limits[:, 0, 0] = 0.9 * bones
    limits[:, 0, 1] = 1.1 * bones
    limits[:, 1] = (0.0, np.pi)
    limits[:, 2] = (-np.pi, np.pi)
    return validate_layout(JointLayout(
        layout_id="tiny5",
        joint_names=("root", "spine", "neck", "head", "collar"),
        kinematic_parent=np.array([-1, 0, 1, 2, 2]),
        markov_parent=np.array([-1, 0, 1, 2, 2]),
        bone_lengths=bones,
        range_limits=limits,
        head_triangle={"a": 2, "b": 3, "c": 4},
    ))


@pytest.fixture(scope="session")
def tiny():
    return make_tiny_layout()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
