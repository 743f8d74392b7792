import numpy as np
import pytest

from saddlebench import (
    Box,
    InstanceSpec,
    MinimaxProblem,
    Oracles,
    StructureInfo,
    WholeSpace,
    make_instance,
)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def sample_xy(problem, seed=0):
    x = problem.set_x.sample(rng(seed))
    y = problem.set_y.sample(rng(seed + 1))
    return x, y


def make_xy_problem(box=1.0):
    """f(x, y) = x y on [-box, box]^2: the canonical antisymmetric game
    with saddle (0, 0), built by hand so tests control every constant."""
    lo, hi = -box, box

    def clip(v):
        return np.clip(np.asarray(v, dtype=float), lo, hi)

    def argmax_y_reg(x, rho, w):
        coef = float(np.asarray(x)[0])
        if rho > 0.0:
            return clip(np.asarray(w, dtype=float) + coef / rho)
        return np.array([hi if coef > 0 else (lo if coef < 0 else 0.0)])

    def argmin_x_reg(y, rho, w):
        coef = float(np.asarray(y)[0])
        if rho > 0.0:
            return clip(np.asarray(w, dtype=float) - coef / rho)
        return np.array([lo if coef > 0 else (hi if coef < 0 else 0.0)])

    return MinimaxProblem(
        name="xy_game",
        eval_f=lambda x, y: float(x[0] * y[0]),
        grad_x=lambda x, y: np.array([float(y[0])]),
        grad_y=lambda x, y: np.array([float(x[0])]),
        set_x=Box([lo], [hi]),
        set_y=Box([lo], [hi]),
        structure=StructureInfo(lipschitz_L=1.0, convex_in_x=True,
                                concave_in_y=True),
        oracles=Oracles(
            argmax_y=lambda x: argmax_y_reg(x, 0.0, np.zeros(1)),
            argmin_x=lambda y: argmin_x_reg(y, 0.0, np.zeros(1)),
            argmax_y_reg=argmax_y_reg,
            argmin_x_reg=argmin_x_reg,
            saddle=lambda: (np.array([0.0]), np.array([0.0])),
            max_ties=lambda x: float(np.asarray(x)[0]) == 0.0,
            min_ties=lambda y: float(np.asarray(y)[0]) == 0.0,
        ),
    )


@pytest.fixture
def xy_problem():
    return make_xy_problem()


@pytest.fixture
def bilinear22():
    return make_instance(InstanceSpec(family="bilinear_cc", n=2, d=2, seed=3))


@pytest.fixture
def bilinear11():
    return make_instance(InstanceSpec(family="bilinear_cc", n=1, d=1, seed=5))


@pytest.fixture
def hard_free():
    return make_instance(InstanceSpec(family="hard_gda", bounded=False))


@pytest.fixture
def hard_box():
    return make_instance(InstanceSpec(family="hard_gda", bounded=True))


@pytest.fixture
def poly():
    return make_instance(InstanceSpec(family="polynomial_nc_c"))


@pytest.fixture
def klq():
    return make_instance(InstanceSpec(family="kl_quadratic", d=2))


ALL_FAMILY_SPECS = [
    InstanceSpec(family="bilinear_cc", n=2, d=2, seed=3),
    InstanceSpec(family="quadratic_cc", n=2, d=2, seed=11),
    InstanceSpec(family="hard_gda", bounded=True),
    InstanceSpec(family="hard_gda", bounded=False),
    InstanceSpec(family="polynomial_nc_c"),
    InstanceSpec(family="kl_quadratic", d=2),
    InstanceSpec(family="transposed",
                 base=InstanceSpec(family="polynomial_nc_c")),
]
