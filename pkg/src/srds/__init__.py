"""Succinctly reconstructed distributed signatures and balanced Byzantine agreement."""
from .core import SrdsParams, SrdsScheme, SrdsSignature
from .errors import (ConfigurationError, EngineError, InvariantError, MalformedInputError, NoSigningKeyError,
                     ParameterError, SrdsError)
from .merkle import MerkleProof, MerkleTree, merkle_hash, merkle_proof, merkle_setup, merkle_verify
from .net import CommMetrics, Engine, RoundEnvelope
from .owf import OwfScheme, OwfSrdsConfig
from .pcd import PcdConfig, PcdScheme
from .tree import CommTree, TreeProfile, build_tree, validate_tree

__version__ = "0.1.0"

__all__ = [
    "CommMetrics", "CommTree", "ConfigurationError", "Engine", "EngineError", "InvariantError",
    "MalformedInputError", "MerkleProof", "MerkleTree", "NoSigningKeyError", "OwfScheme", "OwfSrdsConfig",
    "ParameterError", "PcdConfig", "PcdScheme", "RoundEnvelope", "SrdsError", "SrdsParams", "SrdsScheme",
    "SrdsSignature", "TreeProfile", "build_tree", "merkle_hash", "merkle_proof", "merkle_setup",
    "merkle_verify", "validate_tree",
]
