"""Model parameter records and the conversions between parametrisations."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

ISING = "ising"
BERNOULLI = "bernoulli"
RANDOM_CLUSTER = "random_cluster"
LOOP_O1 = "loop_o1"
SINGLE_CURRENT = "single_current"
DOUBLE_CURRENT = "double_current"

PAIR_PRODUCT = "pair_product"
DISAGREEMENT = "disagreement_count"

EDGE_MODELS = (BERNOULLI, RANDOM_CLUSTER, LOOP_O1, SINGLE_CURRENT, DOUBLE_CURRENT)

_PARAMS = {
    ISING: {"beta", "h", "energy_convention"},
    BERNOULLI: {"p"},
    RANDOM_CLUSTER: {"p", "q", "h"},
    LOOP_O1: {"x"},
    SINGLE_CURRENT: {"x"},
    DOUBLE_CURRENT: {"x"},
}

_ALIASES = {
    "loop-o1": LOOP_O1, "loop": LOOP_O1, "single-current": SINGLE_CURRENT,
    "double-current": DOUBLE_CURRENT, "random-cluster": RANDOM_CLUSTER, "rc": RANDOM_CLUSTER,
    "fk": RANDOM_CLUSTER, "ber": BERNOULLI,
}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    """Tagged parameter record; only the parameters of ``tag`` may be set."""

    tag: str
    beta: float | None = None
    h: float | None = None
    p: float | None = None
    q: float | None = None
    x: float | None = None
    energy_convention: str | None = None

    def __post_init__(self):
        tag = _ALIASES.get(self.tag, self.tag)
        object.__setattr__(self, "tag", tag)
        if tag not in _PARAMS:
            raise ModelError(f"unknown model {self.tag!r}")
        allowed = _PARAMS[tag]
        for name in ("beta", "h", "p", "q", "x", "energy_convention"):
            value = getattr(self, name)
            if value is not None and name not in allowed:
                raise ModelError(f"parameter {name} does not apply to {tag}")
        # defaults
        if tag == ISING:
            if self.h is None:
                object.__setattr__(self, "h", 0.0)
            if self.energy_convention is None:
                object.__setattr__(self, "energy_convention", PAIR_PRODUCT)
        if tag == RANDOM_CLUSTER and self.h is None:
            object.__setattr__(self, "h", 0.0)
        for name in allowed - {"energy_convention"}:
            if getattr(self, name) is None:
                raise ModelError(f"{tag} needs parameter {name}")
        if tag == ISING:
            if self.beta < 0:
                raise ModelError("beta must be >= 0")
            if self.energy_convention not in (PAIR_PRODUCT, DISAGREEMENT):
                raise ModelError(f"unknown energy convention {self.energy_convention!r}")
        if self.h is not None and self.h < 0:
            raise ModelError("field must be >= 0")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ModelError("p must lie in [0, 1]")
        if self.q is not None and self.q < 1.0:
            raise ModelError("q must be >= 1")
        if self.x is not None and not 0.0 <= self.x <= 1.0:
            raise ModelError("x must lie in [0, 1]")

    @classmethod
    def ising(cls, beta, h=0.0, convention=PAIR_PRODUCT):
        return cls(ISING, beta=float(beta), h=float(h), energy_convention=convention)

    @classmethod
    def bernoulli(cls, p):
        return cls(BERNOULLI, p=float(p))

    @classmethod
    def random_cluster(cls, p, q=2.0, h=0.0):
        return cls(RANDOM_CLUSTER, p=float(p), q=float(q), h=float(h))

    @classmethod
    def loop_o1(cls, x):
        return cls(LOOP_O1, x=float(x))

    @classmethod
    def single_current(cls, x):
        return cls(SINGLE_CURRENT, x=float(x))

    @classmethod
    def double_current(cls, x):
        return cls(DOUBLE_CURRENT, x=float(x))

    @property
    def is_edge_model(self) -> bool:
        return self.tag in EDGE_MODELS

    @property
    def p_h(self) -> float:
        return p_h_from_h(self.h, self.q)

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_json(cls, data: dict) -> ModelSpec:
        data = dict(data)
        tag = data.pop("tag", None) or data.pop("model", None)
        return cls(tag, **{k: (v if k == "energy_convention" else float(v)) for k, v in data.items()})


# -- conversions -----------------------------------------------------------

def x_from_beta(beta: float) -> float:
    return math.tanh(beta)


def p_from_beta(beta: float) -> float:
    """FK edge probability 1 - exp(-2 beta)."""
    return -math.expm1(-2.0 * beta)


def beta_from_p(p: float) -> float:
    return -0.5 * math.log1p(-p)


def x_from_p(p: float) -> float:
    return p / (2.0 - p)


def p_from_x(x: float) -> float:
    return 2.0 * x / (1.0 + x)


def current_p_from_x(x: float) -> float:
    """Bernoulli parameter 1 - sqrt(1 - x^2) of the single-current union."""
    return 1.0 - math.sqrt(1.0 - x * x)


def current_p_from_beta(beta: float) -> float:
    return 1.0 - 1.0 / math.cosh(beta)


def p_h_from_h(h: float, q: float) -> float:
    """Ghost-edge probability 1 - exp(-q h / (q - 1))."""
    if q == 1.0:
        return 0.0 if h == 0 else 1.0
    return -math.expm1(-q * h / (q - 1.0))


def h_from_p_h(p_h: float, q: float) -> float:
    if q == 1.0:
        raise ModelError("field is not identifiable at q = 1")
    return -(q - 1.0) / q * math.log1p(-p_h)
