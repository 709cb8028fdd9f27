"""Running the entangling protocol on two input qubits.

Layout while Gamma is attached (20 anyons)::

    [left input a1..a4][Gamma: b1..b4 c1..c4 d1..d4][right input e1..e4]

Fusions a4-b1 and d4-e1 are forced to the vacuum; fusions a3-b2 and d3-e2
are sampled and, when they give a single anyon, the matching recovery
restores the inputs.  Once all four vacuum fusions succeed, fusing c2-c3
applies G1 (vacuum) or G2 (anyon) to the inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..codec import QubitRegister, decode
from ..fusion_basis import TAU, VACUUM, AnyonState
from ..operators import ProtocolError, apply_braid, force_fuse_vacuum, fuse_adjacent, postselect_fusion
from ..trace import ProtocolTrace, RandomSource
from .gates import GATES, R_GATE, WalkState
from .layout import discard_block
from .preparation import AncillaGamma, GammaFactory, conjugate_gamma

FUSE_BUDGET = 10**4
WALK_BUDGET = 10**5
FORCED_BUDGET = 10**6
DISPOSAL_TOL = 1e-10

_default_factory: GammaFactory | None = None


def default_gammas() -> GammaFactory:
    """Process-wide cached Gamma source (prepared once, on first use)."""
    global _default_factory
    if _default_factory is None:
        _default_factory = GammaFactory(seed=0, cache=True)
    return _default_factory


@dataclass
class FuseResult:
    outcome: str                     # "fused" or "recovered"
    state: AnyonState
    side: str | None = None          # which fusion failed: "left" or "right"
    middle: int | None = None        # projected middle-qubit value in a recovery
    forced_rounds: tuple[int, ...] = ()
    residue_entropy: float = 0.0
    checked_fusion: int | None = None  # outcome of the "necessarily 1" fusion


def _twist(state: AnyonState, k: int, chirality: int) -> AnyonState:
    return apply_braid(state, k, 5 * chirality)


def _recover(state: AnyonState, side: str, rng: RandomSource, chirality: int) -> FuseResult:
    """Undo a failed second (left) or fourth (right) fusion.

    The middle ancilla qubit is projected by fusing its left pair.  If it is
    |1>, the surviving ancilla halves hold beta instead of alpha and are fixed
    by five half twists, before the fused anyon is merged back into the input
    block (which must give a single anyon).
    """
    n = state.n
    mid_left = 6 if side == "left" else 5
    y, state = fuse_adjacent(state, mid_left, rng, op="project_middle")
    n = state.n
    if y == TAU:
        if side == "left":
            state = _twist(state, 4, chirality)
        else:
            state = _twist(state, n - 4, chirality)
            state = _twist(state, 3, chirality)
        rng.log("recovery_twist", params={"side": side, "chirality": chirality}, dim=state.dim)
    k = 3 if side == "left" else n - 3
    c, state = fuse_adjacent(state, k, rng, op="recovery_fuse")
    if c != TAU:
        raise ProtocolError(f"{side} recovery fusion gave the vacuum instead of a single anyon")
    state, entropy = discard_block(state, 5, state.n - 4, tol=DISPOSAL_TOL)
    rng.log("discard_residue", params={"side": side, "entropy": entropy}, dim=state.dim)
    return FuseResult("recovered", state.normalize(), side, y, residue_entropy=entropy, checked_fusion=c)


def fuse_gamma(inputs: QubitRegister, g: AncillaGamma, rng: RandomSource, mode: str = "literal",
               chirality: int = 1) -> FuseResult:
    """Fuse the input qubits into the outer qubits of Gamma.

    On success the 12-anyon state ``[left][middle ancilla][right]`` is
    returned with outcome ``"fused"``; otherwise the inputs are restored and
    returned (8 anyons) with outcome ``"recovered"``.
    """
    if inputs.m != 2:
        raise ValueError("fuse_gamma needs a two-qubit register")
    state = _attach(inputs.state, g.register.state)
    rng.log("attach_gamma", params={"conjugated": g.conjugated}, dim=state.dim)

    state, r1 = force_fuse_vacuum(state, 4, (1, 4), rng, mode, FORCED_BUDGET)
    c, state = fuse_adjacent(state, 3, rng, op="fuse_left")
    if c == TAU:
        res = _recover(state, "left", rng, chirality)
        res.forced_rounds = (r1,)
        return res

    state, r3 = force_fuse_vacuum(state, 12, (13, 16), rng, mode, FORCED_BUDGET)
    c, state = fuse_adjacent(state, 11, rng, op="fuse_right")
    if c == TAU:
        res = _recover(state, "right", rng, chirality)
        res.forced_rounds = (r1, r3)
        return res
    return FuseResult("fused", state, forced_rounds=(r1, r3))


def _attach(inputs: AnyonState, gamma: AnyonState) -> AnyonState:
    amps = {p[:4] + q + p[4:]: a * b for p, a in inputs.amps.items() for q, b in gamma.amps.items()}
    return AnyonState(inputs.n + gamma.n, VACUUM, amps)


def _entangle_fused(state: AnyonState, rng: RandomSource, conjugated: bool) -> tuple[str, AnyonState, float]:
    c, state = fuse_adjacent(state, 6, rng, op="fuse_middle")
    label = ("G1" if c == VACUUM else "G2") + ("inv" if conjugated else "")
    stop = 6 if c == VACUUM else 7
    state, entropy = discard_block(state, 5, stop, tol=DISPOSAL_TOL)
    rng.log("dispose_middle", params={"anyons": stop - 4, "entropy": entropy}, outcome=label, dim=state.dim)
    return label, state.normalize(), entropy


def entangle_branch(inputs: QubitRegister, g: AncillaGamma, middle: int, rng: RandomSource,
                    mode: str = "literal") -> tuple[QubitRegister, float]:
    """Run the fusion stage conditioned on the fused branch and a middle outcome.

    The forced fusions are simulated as usual; the two sampled fusions are
    conditioned on the vacuum and the middle fusion on ``middle``.  Returns
    the resulting register and the probability of the conditioned outcomes.
    """
    state = _attach(inputs.state, g.register.state)
    prob = 1.0
    state, _ = force_fuse_vacuum(state, 4, (1, 4), rng, mode, FORCED_BUDGET)
    state, p = postselect_fusion(state, 3, VACUUM)
    prob *= p
    state, _ = force_fuse_vacuum(state, 12, (13, 16), rng, mode, FORCED_BUDGET)
    state, p = postselect_fusion(state, 11, VACUUM)
    prob *= p
    state, p = postselect_fusion(state, 6, middle)
    prob *= p
    if prob < 1e-14:
        raise ProtocolError("conditioned branch has zero probability")
    state, _ = discard_block(state, 5, 6 if middle == VACUUM else 7, tol=DISPOSAL_TOL)
    return QubitRegister(state.normalize()), prob


@dataclass
class EntangleResult:
    label: str
    register: QubitRegister
    recoveries: list[FuseResult] = field(default_factory=list)
    forced_rounds: list[int] = field(default_factory=list)


def _random_entangle(inputs: QubitRegister, rng: RandomSource, gammas: Callable[[], AncillaGamma] | None,
                     conjugate: bool, mode: str, budget: int) -> EntangleResult:
    gammas = gammas or default_gammas()
    recoveries = []
    rounds: list[int] = []
    for _ in range(budget):
        g = gammas()
        if conjugate:
            g = conjugate_gamma(g)
        res = fuse_gamma(inputs, g, rng, mode)
        rounds.extend(res.forced_rounds)
        if res.outcome == "recovered":
            recoveries.append(res)
            inputs = QubitRegister(res.state)
            continue
        label, state, _ = _entangle_fused(res.state, rng, conjugate)
        return EntangleResult(label, QubitRegister(state), recoveries, rounds)
    raise ProtocolError(f"inputs not fused with an ancilla within {budget} attempts")


def random_entangle(inputs: QubitRegister, rng: RandomSource, gammas=None, mode: str = "literal",
                    budget: int = FUSE_BUDGET) -> EntangleResult:
    """Apply G1 or G2 at random (label ``"G1"`` or ``"G2"``)."""
    return _random_entangle(inputs, rng, gammas, False, mode, budget)


def random_entangle_inverse(inputs: QubitRegister, rng: RandomSource, gammas=None, mode: str = "literal",
                            budget: int = FUSE_BUDGET) -> EntangleResult:
    """Apply G1^-1 or G2^-1 at random, using the conjugated ancilla."""
    return _random_entangle(inputs, rng, gammas, True, mode, budget)


@dataclass
class WalkResult:
    register: QubitRegister
    labels: list[str]
    states: list[WalkState]
    trace: ProtocolTrace | None
    recoveries: int = 0
    forced_rounds: list[int] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.labels)

    def accumulated(self) -> np.ndarray:
        """Product of the gates named by the labels."""
        acc = np.eye(4, dtype=complex)
        for lab in self.labels:
            acc = GATES[lab] @ acc
        return acc


def walk_to_G1(inputs: QubitRegister, rng: RandomSource, max_steps: int = WALK_BUDGET, gammas=None,
               mode: str = "literal") -> WalkResult:
    """Random walk over ``G1**k G2**l`` until exactly G1 has been applied."""
    ws = WalkState()
    labels, states = [], []
    recoveries = 0
    rounds: list[int] = []
    reg = inputs
    while not ws.done:
        if len(labels) >= max_steps:
            raise ProtocolError(f"walk did not reach G1 within {max_steps} steps")
        step = random_entangle if ws.l == 0 else random_entangle_inverse
        res = step(reg, rng, gammas, mode)
        reg = res.register
        ws = ws.step(res.label)
        labels.append(res.label)
        states.append(ws)
        recoveries += len(res.recoveries)
        rounds.extend(res.forced_rounds)
        rng.log("walk", params={"k": ws.k, "l": ws.l}, outcome=res.label, dim=reg.state.dim)
    return WalkResult(reg, labels, states, rng.trace, recoveries, rounds)


def controlled_rotation(inputs: QubitRegister, rng: RandomSource, gammas=None,
                        mode: str = "literal") -> WalkResult:
    """CR(2 pi / 5): walk to G1, then sigma_1^-2 on the first pair of each qubit."""
    walk = walk_to_G1(inputs, rng, gammas=gammas, mode=mode)
    state = apply_braid(apply_braid(walk.register.state, 1, -2), 5, -2)
    v, leak = decode(state)
    r2 = np.linalg.matrix_power(R_GATE, -2)
    gate = np.diag(np.kron(r2, r2) @ walk.accumulated())
    gate = gate / gate[0]
    rng.log("final_braid", params={"word": "s1^-2 s5^-2", "gate": _pairs(gate), "leak": float(leak)},
            outcome=_pairs(v), dim=state.dim)
    walk.register = QubitRegister(state)
    return walk


def _pairs(v) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]
