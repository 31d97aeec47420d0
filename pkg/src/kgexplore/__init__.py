"""Knowledge-graph exploration toolkit.

Pieces: an interned triple store with inverse augmentation (kgstore), a
question corpus loader (corpus), a gold-trajectory miner (miner), a
step-wise exploration runtime with pluggable policies (runtime, policy),
rule-based rewards with group-relative advantages (rewards), KGQA metrics
and a k-hop baseline retriever (evalkit), and a CLI tying them together.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
