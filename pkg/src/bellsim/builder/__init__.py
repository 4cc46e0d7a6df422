from .states import (
    DensityMatrix, Povm, pure_state, maximally_mixed, phi_plus, psi_minus, werner_state,
    product_state, combine_bipartite, projective_povm, qubit_xz_povm, chsh_optimal_povms,
    basis_povm, trivial_povm,
)
from .channels import (
    QuantumChannel, kraus_to_choi, choi_to_kraus, apply_channel, is_signalling, is_classical,
    has_classical_output, identity_channel, bipartite_identity, unitary_channel, replacement_channel,
    swap_channel, depolarizing_channel, product_channel, classical_channel, measurement_channel,
    povm_channel,
)
from .wiring import Wires, compose
from .generators import (
    make_rng, random_state, random_povm, random_channel, random_unitary, random_separable_state,
    random_projective_povm, random_local_channel_mixture,
)
from .instruments import (
    Instrument, PreLoccRound, PreLoccProtocol, Branch, run_protocol, local_filter_instrument,
    randomness_instrument, discard_and_prepare_instrument, shared_randomness_protocol,
    local_filter_protocol,
)
