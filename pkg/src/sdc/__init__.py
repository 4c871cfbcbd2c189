"""Exact simulator and verification suite for dense coding over entangled
spatial channel states."""

from .hadamard import HadamardMatrix, build, h_unnormalized
from .hilbert import (
    DenseOp,
    SignedPermutationOp,
    StateVector,
    apply,
    apply_full,
    inner,
    partial_trace,
    tensor,
)
from .bell import (
    BellLabel,
    ModularMap,
    all_labels,
    bell_state,
    compact_bell_state,
    derive_compact_relabel,
    label_to_message,
    message_to_label,
)
from .encoder import encode_composed, encode_direct
from .decoder import build_decode_table, decode_grand, decode_pipeline, grand_operator
from .analysis import (
    TimingModel,
    advantage,
    capacity_bits,
    rate_maximal,
    rate_pairwise,
    rate_spatial,
    run_protocol,
    spin_capacity,
)

__version__ = "0.1.0"
