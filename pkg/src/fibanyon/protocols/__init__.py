"""Gate protocols built from braiding, fusion and ancillas."""
from .execution import (EntangleResult, FuseResult, WalkResult, controlled_rotation, default_gammas,
                        entangle_branch, fuse_gamma, random_entangle, random_entangle_inverse, walk_to_G1)
from .gates import CR, CZ, D_OPERATORS, G1, G2, GATES, WalkState, gamma_vector
from .layout import DisposalError, discard_block, insert_block, juxtapose, split_block
from .preparation import (AncillaGamma, GammaFactory, PreparationError, apply_D, conjugate_gamma,
                          encoded_gamma, gate_CZ, gate_X, make_alpha, make_beta, make_middle, prepare_bell,
                          prepare_gamma)
