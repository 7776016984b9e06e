"""GKR over general circuits.

Claims on ``V_j`` are kept in a per-layer registry. When the protocol
reaches layer ``j`` all pending claims are folded with one random
challenge, and the folded claim is reduced by one two-phase sumcheck per
(left source layer, right source layer) wire group. Each sumcheck leaves two
new claims on (possibly older) source layers. Input-layer claims are handed
back to the caller.
"""

from __future__ import annotations

import hashlib
import struct
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .circuit import GeneralCircuit, check, dumps, evaluate
from .counters import OpCounter, tick
from .field import FieldConfig, FieldElement
from .mle import MultilinearTable, beta_bits, eq_table, eval_values
from .sumcheck import SumcheckProof, expected_layer_claim, layer_sum, prove_layer, verify_two_phase
from .transcript import Transcript


class GkrError(ValueError):
    pass


@dataclass(frozen=True)
class LayerClaim:
    """``value == sum_k coeffs[k] * V_layer(points[k])``; a plain claim has one point with coefficient 1."""

    layer: int
    points: tuple[tuple[int, ...], ...]
    coeffs: tuple[int, ...]
    value: int

    @classmethod
    def at(cls, layer: int, point: Sequence[int], value: int) -> "LayerClaim":
        return cls(layer, (tuple(point),), (1,), value)

    @property
    def point(self) -> tuple[int, ...]:
        if len(self.points) != 1:
            raise GkrError("folded claim spans several points")
        return self.points[0]

    def weight_table(self, p: int) -> list[int]:
        size = 1 << len(self.points[0])
        table = [0] * size
        for c, z in zip(self.coeffs, self.points):
            for g, e in enumerate(eq_table(z, p)):
                table[g] = (table[g] + c * e) % p
        return table

    def weight_of(self, g: int, p: int) -> int:
        return sum(c * beta_bits(z, g, p) for c, z in zip(self.coeffs, self.points)) % p

    def holds_for(self, table: MultilinearTable) -> bool:
        p = table.field.modulus
        total = sum(c * eval_values(table.values, z, p) for c, z in zip(self.coeffs, self.points))
        return total % p == self.value % p


def combine_claims(claims: Sequence[LayerClaim], transcript: Transcript) -> tuple[LayerClaim, int | None]:
    """Fold claims on one layer with powers of a transcript challenge.

    Returns the folded claim and the challenge (``None`` when a single
    claim is passed through unchanged). Claims at the same point merge, so
    two identical claims give one point with coefficient ``1 + alpha``.
    """
    if not claims:
        raise GkrError("no claims to combine")
    layer = claims[0].layer
    if any(c.layer != layer for c in claims):
        raise GkrError("claims on different layers")
    if len(claims) == 1:
        return claims[0], None
    p = transcript.field.modulus
    alpha = transcript.challenge(b"combine")
    merged: dict[tuple[int, ...], int] = {}
    value = 0
    power = 1
    for claim in claims:
        for c, z in zip(claim.coeffs, claim.points):
            merged[z] = (merged.get(z, 0) + power * c) % p
        value += power * claim.value
        power = power * alpha % p
    return LayerClaim(layer, tuple(merged), tuple(merged.values()), value % p), alpha


@dataclass(frozen=True)
class LayerProof:
    layer: int
    alpha: int | None
    groups: tuple[tuple[int, int], ...]
    subclaims: tuple[int, ...]
    sumchecks: tuple[SumcheckProof, ...]


@dataclass(frozen=True)
class GkrProof:
    field: FieldConfig
    outputs: tuple[int, ...]
    layers: tuple[LayerProof, ...]

    def to_bytes(self) -> bytes:
        f = self.field
        out = [struct.pack("<II", len(self.layers), len(self.outputs)), f.encode_all(self.outputs)]
        for lp in self.layers:
            out.append(struct.pack("<IBI", lp.layer, lp.alpha is not None, len(lp.groups)))
            if lp.alpha is not None:
                out.append(f.encode(lp.alpha))
            for (a, b), t, sc in zip(lp.groups, lp.subclaims, lp.sumchecks):
                body = sc.to_bytes()
                out.append(struct.pack("<III", a, b, len(body)) + f.encode(t) + body)
        return b"".join(out)


class GkrVerdict(NamedTuple):
    accept: bool
    input_claims: list[LayerClaim]
    reason: str = ""


def _circuit_digest(c: GeneralCircuit) -> bytes:
    return hashlib.sha256(dumps(c).encode()).digest()


def _padded_outputs(c: GeneralCircuit, outs: Sequence[int], p: int) -> list[int]:
    return [v % p for v in outs] + [0] * (c.padded_width(c.depth) - len(outs))


def gkr_prove(c: GeneralCircuit, inputs: Sequence[int | FieldElement], transcript: Transcript,
              counter: OpCounter | None = None) -> GkrProof:
    field = transcript.field
    p = field.modulus
    values = evaluate(c, inputs, field)
    L = c.depth
    outs = values[L].values[: c.width(L)]
    transcript.absorb(b"circuit", _circuit_digest(c))
    transcript.absorb_ints(b"outputs", outs)
    z = transcript.challenges(c.num_vars(L))
    registry: dict[int, list[LayerClaim]] = defaultdict(list)
    registry[L].append(LayerClaim.at(L, z, eval_values(values[L].values, z, p)))
    layer_proofs = []
    for i in range(L, 0, -1):
        claim, alpha = combine_claims(registry.pop(i), transcript)
        weights = claim.weight_table(p)
        tick(counter, "table_touch", len(weights))
        groups = c.wire_groups(i)
        subclaims = [layer_sum(w, weights, values[a].values, values[b].values, p) for (a, b), w in groups.items()]
        tick(counter, "wire_touch", c.wire_count(i))
        transcript.absorb_ints(b"subclaims", subclaims)
        proofs = []
        for (a, b), wires in groups.items():
            proof, r_x, r_y = prove_layer(wires, (values[a], values[b]), transcript, weights, counter)
            va, vb = proof.final_evals
            registry[a].append(LayerClaim.at(a, r_x, va))
            registry[b].append(LayerClaim.at(b, r_y, vb))
            proofs.append(proof)
        layer_proofs.append(LayerProof(i, alpha, tuple(groups), tuple(subclaims), tuple(proofs)))
    registry.pop(0, None)
    if registry:
        raise GkrError(f"unconsumed claims on layers {sorted(registry)}")
    return GkrProof(field, tuple(outs), tuple(layer_proofs))


def gkr_verify(c: GeneralCircuit, claimed_outputs: Sequence[int | FieldElement], proof: GkrProof,
               transcript: Transcript, counter: OpCounter | None = None) -> GkrVerdict:
    """Verify ``proof``; on success return the claims left on the input layer.

    The caller settles those claims, either against the known inputs
    (:func:`check_input_claims`) or against a polynomial commitment.
    """
    field = transcript.field
    p = field.modulus
    try:
        check(c)
    except ValueError as exc:
        return GkrVerdict(False, [], f"invalid circuit: {exc}")
    L = c.depth
    outs = field.coerce_all(claimed_outputs)
    if len(outs) != c.width(L):
        return GkrVerdict(False, [], "wrong number of claimed outputs")
    if list(proof.outputs) != outs:
        return GkrVerdict(False, [], "proof outputs differ from claimed outputs")
    if len(proof.layers) != L:
        return GkrVerdict(False, [], "proof depth mismatch")
    transcript.absorb(b"circuit", _circuit_digest(c))
    transcript.absorb_ints(b"outputs", outs)
    z = transcript.challenges(c.num_vars(L))
    registry: dict[int, list[LayerClaim]] = defaultdict(list)
    registry[L].append(LayerClaim.at(L, z, eval_values(_padded_outputs(c, outs, p), z, p)))
    for lp, i in zip(proof.layers, range(L, 0, -1)):
        if lp.layer != i:
            return GkrVerdict(False, [], f"layer order mismatch at {i}")
        claim, alpha = combine_claims(registry.pop(i), transcript)
        if alpha != lp.alpha:
            return GkrVerdict(False, [], f"layer {i}: combination challenge mismatch")
        groups = c.wire_groups(i)
        if tuple(groups) != lp.groups or len(lp.subclaims) != len(groups) or len(lp.sumchecks) != len(groups):
            return GkrVerdict(False, [], f"layer {i}: wire groups mismatch")
        if any(not 0 <= t < p for t in lp.subclaims) or sum(lp.subclaims) % p != claim.value:
            return GkrVerdict(False, [], f"layer {i}: subclaims do not add up to the layer claim")
        transcript.absorb_ints(b"subclaims", lp.subclaims)
        weight_of = lambda g, claim=claim: claim.weight_of(g, p)  # noqa: E731
        for ((a, b), wires), t, sc in zip(groups.items(), lp.subclaims, lp.sumchecks):
            verdict = verify_two_phase(t, sc, c.num_vars(a), c.num_vars(b), transcript)
            if not verdict.accept:
                return GkrVerdict(False, [], f"layer {i} group {(a, b)}: {verdict.reason}")
            va, vb = sc.final_evals
            tick(counter, "predicate_eval", len(wires))
            if expected_layer_claim(wires, weight_of, verdict.r_x, verdict.r_y, va, vb, p) != verdict.final_claim:
                return GkrVerdict(False, [], f"layer {i} group {(a, b)}: predicate check failed")
            registry[a].append(LayerClaim.at(a, verdict.r_x, va))
            registry[b].append(LayerClaim.at(b, verdict.r_y, vb))
    input_claims = registry.pop(0, [])
    if registry:
        return GkrVerdict(False, [], f"unconsumed claims on layers {sorted(registry)}")
    return GkrVerdict(True, input_claims)


def input_table(c: GeneralCircuit, inputs: Sequence[int | FieldElement], field: FieldConfig) -> MultilinearTable:
    vals = field.coerce_all(inputs) + [v % field.modulus for v in c.constants]
    return MultilinearTable(field, tuple(vals + [0] * (c.padded_width(0) - len(vals))))


def check_input_claims(c: GeneralCircuit, claims: Sequence[LayerClaim], inputs: Sequence[int | FieldElement],
                       field: FieldConfig) -> bool:
    table = input_table(c, inputs, field)
    return all(cl.layer == 0 and cl.holds_for(table) for cl in claims)
