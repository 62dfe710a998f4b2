"""Single-round elliptic-curve zero-knowledge identification (ZKP1, ZKP2)
and mutual authentication with key agreement (ZKP3)."""

from .curve import P192, TINY17, Curve, Point, get_curve, validate_params
from .protocols import (
    CompromisePool,
    Identity,
    State,
    Zkp1Prover,
    Zkp1Verifier,
    Zkp2Prover,
    Zkp2Verifier,
    Zkp3Party,
    keygen,
    simulate_transcript,
    zkp3_run,
)
from .wire import CostReport, compare_protocols, measure_session

__all__ = [
    "P192", "TINY17", "Curve", "Point", "get_curve", "validate_params",
    "CompromisePool", "Identity", "State", "Zkp1Prover", "Zkp1Verifier",
    "Zkp2Prover", "Zkp2Verifier", "Zkp3Party", "keygen", "simulate_transcript",
    "zkp3_run", "CostReport", "compare_protocols", "measure_session",
]
