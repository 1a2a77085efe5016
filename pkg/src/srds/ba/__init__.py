"""Byzantine agreement with balanced polylog communication."""
from .adversary import (ADVERSARIES, Adversary, AdversaryView, Equivocator, KeyReplacer, Silent,
                        TreeStaler, make_adversary)
from .lowerbound import SrdsTarget, Strawman, attack_rate, isolation_attack_demo
from .oracles import committee_tolerance, f_ae_broadcast, f_aggr_sig, f_ba, f_ct
from .presets import PRESETS, BaPreset, get_preset
from .protocol import BaOutcome, run_ba, run_preset

__all__ = [
    "ADVERSARIES", "Adversary", "AdversaryView", "BaOutcome", "BaPreset", "Equivocator",
    "KeyReplacer", "PRESETS", "Silent", "SrdsTarget", "Strawman", "TreeStaler", "attack_rate", "committee_tolerance", "f_ae_broadcast",
    "f_aggr_sig", "f_ba", "f_ct", "get_preset", "isolation_attack_demo", "make_adversary", "run_ba", "run_preset",
]
