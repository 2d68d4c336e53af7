"""Simulator for the k-site message-passing model with exact bit accounting."""
from .kernel import (BitVector, Composite, CostLedger, DivergenceError, Edge, EdgeList,
                     Element, ElementList, Protocol, ProtocolError, RangeError, RunResult,
                     UInt, UsageError, bit_length, replay_ledger, run_protocol)

__version__ = "0.1.0"
