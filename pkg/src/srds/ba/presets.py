"""Desk-scale parameter presets for the agreement protocol."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from ..core import SrdsScheme, log2ceil
from ..errors import ParameterError
from ..owf import OwfScheme, OwfSrdsConfig
from ..pcd import PcdConfig, PcdScheme
from ..tree import TreeProfile

#: accept iff more than half of the expected signers signed
MAJORITY = Fraction(1, 2)
#: ell = ceil(ELL_C * log2(N)^2) for N virtual parties
ELL_C = 2.5
ALPHA_CONST = 160
KAPPA = 16


@dataclass(frozen=True)
class BaPreset:
    name: str
    n: int
    profile: TreeProfile
    ell: int
    out_size: int
    comm_B: int
    beta: float = 0.3
    alpha_const: int = ALPHA_CONST
    kappa: int = KAPPA
    threshold_ratio: Fraction = MAJORITY

    @property
    def n_virtual(self) -> int:
        return self.n * self.profile.z

    @property
    def t(self) -> int:
        return math.floor(self.beta * self.n)

    def owf_config(self, **kw) -> OwfSrdsConfig:
        args = dict(ell=self.ell, kappa=self.kappa, threshold_ratio=self.threshold_ratio,
                    c_exp=ELL_C, alpha_const=self.alpha_const)
        args.update(kw)
        return OwfSrdsConfig(**args)

    def pcd_config(self, **kw) -> PcdConfig:
        args = dict(kappa=self.kappa, alpha_const=self.alpha_const)
        args.update(kw)
        return PcdConfig(**args)

    def scheme(self, name: str = "owf") -> SrdsScheme:
        if name == "owf":
            return OwfScheme(self.owf_config())
        if name == "pcd":
            return PcdScheme(self.pcd_config())
        raise ParameterError(f"unknown scheme {name!r}")

    def comm_bound_bits(self) -> int:
        return self.comm_B * log2ceil(self.n) ** 2 * self.kappa


def desk_ell(n_virtual: int) -> int:
    return math.ceil(ELL_C * math.log2(n_virtual) ** 2)


def fanout_size(n: int) -> int:
    return min(n, 3 * log2ceil(n))


def _preset(name: str, n: int, height: int, k_node: int, comm_B: int) -> BaPreset:
    b, z, k_leaf = 4, 4, 16
    prof = TreeProfile(b=b, k_node=k_node, k_leaf=k_leaf, n_leaves=b ** (height - 1), height=height, z=z)
    prof.check(n)
    return BaPreset(name, n, prof, desk_ell(n * z), fanout_size(n), comm_B)


PRESETS: dict[str, BaPreset] = {
    p.name: p for p in (
        _preset("n16", 16, 2, 9, 32000),
        _preset("n64", 64, 3, 9, 32000),
        _preset("n256", 256, 4, 16, 32000),
        _preset("n1024", 1024, 5, 16, 32000),
    )
}


def get_preset(name: str, beta: Optional[float] = None) -> BaPreset:
    try:
        p = PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if beta is not None:
        p = replace(p, beta=beta)
    return p
