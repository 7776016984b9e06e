import random

import pytest

from distproof.circuit import accumulation_adder, identity_circuit, outputs, random_circuit
from distproof.counters import OpCounter
from distproof.field import BN254, TOY97
from distproof.gkr import (
    GkrError,
    LayerClaim,
    check_input_claims,
    combine_claims,
    gkr_prove,
    gkr_verify,
    input_table,
)
from distproof.mle import mle_eval
from distproof.sumcheck import RoundPolynomial
from distproof.transcript import Transcript

P = BN254.modulus


def run(c, xs, claimed=None, field=BN254):
    proof = gkr_prove(c, xs, Transcript(field))
    claimed = list(proof.outputs) if claimed is None else claimed
    return proof, gkr_verify(c, claimed, proof, Transcript(field))


def test_adder_verifies():
    c = accumulation_adder(4)
    proof, verdict = run(c, [1, 2, 3, 4])
    assert proof.outputs == (10,)
    assert verdict.accept
    assert check_input_claims(c, verdict.input_claims, [1, 2, 3, 4], BN254)


def test_tampered_output_rejected():
    c = accumulation_adder(4)
    proof = gkr_prove(c, [1, 2, 3, 4], Transcript(BN254))
    assert not gkr_verify(c, [11], proof, Transcript(BN254)).accept
    assert not gkr_verify(c, [11], proof.__class__(BN254, (11,), proof.layers), Transcript(BN254)).accept


def test_input_claims_match_mle(rng):
    c = random_circuit(rng, 2, 64)
    xs = [rng.randrange(P) for _ in range(c.input_size)]
    _, verdict = run(c, xs)
    assert verdict.accept
    table = input_table(c, xs, BN254)
    for claim in verdict.input_claims:
        assert claim.value == sum(k * mle_eval(table, z).value for k, z in zip(claim.coeffs, claim.points)) % P


def test_different_inputs_caught(rng):
    c = random_circuit(rng, 3, 16)
    xs = [rng.randrange(P) for _ in range(c.input_size)]
    _, verdict = run(c, xs)
    ys = list(xs)
    ys[0] = (ys[0] + 1) % P
    assert verdict.accept
    assert not check_input_claims(c, verdict.input_claims, ys, BN254)


def test_empty_circuit_is_vacuous():
    c = identity_circuit(3).__class__(3, ())
    proof, verdict = run(c, [4, 5, 6])
    assert verdict.accept
    assert check_input_claims(c, verdict.input_claims, [4, 5, 6], BN254)


def test_layer_mutations_rejected(rng):
    c = random_circuit(rng, 2, 8)
    xs = [rng.randrange(P) for _ in range(c.input_size)]
    proof = gkr_prove(c, xs, Transcript(BN254))
    lp = proof.layers[0]
    sc = lp.sumchecks[0]
    coeffs = list(sc.rounds[0].coeffs)
    coeffs[2] = (coeffs[2] + 1) % P
    bad_sc = sc.replace(rounds=(RoundPolynomial(tuple(coeffs)),) + sc.rounds[1:])
    bad_layer = lp.__class__(lp.layer, lp.alpha, lp.groups, lp.subclaims, (bad_sc,) + lp.sumchecks[1:])
    bad = proof.__class__(BN254, proof.outputs, (bad_layer,) + proof.layers[1:])
    assert not gkr_verify(c, proof.outputs, bad, Transcript(BN254)).accept
    va, vb = sc.final_evals
    bad_finals = sc.replace(final_evals=((va + 1) % P, vb))
    bad_layer = lp.__class__(lp.layer, lp.alpha, lp.groups, lp.subclaims, (bad_finals,) + lp.sumchecks[1:])
    bad = proof.__class__(BN254, proof.outputs, (bad_layer,) + proof.layers[1:])
    assert not gkr_verify(c, proof.outputs, bad, Transcript(BN254)).accept


def test_prover_work_linear_in_wires(rng):
    c = random_circuit(rng, 3, 32)
    xs = [rng.randrange(P) for _ in range(c.input_size)]
    counter = OpCounter()
    gkr_prove(c, xs, Transcript(BN254), counter)
    wires = sum(c.wire_count(i) for i in range(1, c.depth + 1))
    assert counter["wire_touch"] <= 3 * wires


def test_verifier_predicate_work_linear(rng):
    c = random_circuit(rng, 3, 32)
    xs = [rng.randrange(P) for _ in range(c.input_size)]
    proof = gkr_prove(c, xs, Transcript(BN254))
    counter = OpCounter()
    assert gkr_verify(c, proof.outputs, proof, Transcript(BN254), counter).accept
    assert counter["predicate_eval"] == sum(c.wire_count(i) for i in range(1, c.depth + 1))


def test_combine_single_claim_unchanged():
    claim = LayerClaim.at(1, (3, 4), 9)
    out, alpha = combine_claims([claim], Transcript(BN254))
    assert out == claim and alpha is None


def test_combine_identical_claims():
    claim = LayerClaim.at(1, (3, 4), 9)
    out, alpha = combine_claims([claim, claim], Transcript(BN254))
    assert out.points == ((3, 4),)
    assert out.coeffs == ((1 + alpha) % P,)
    assert out.value == 9 * (1 + alpha) % P


def test_combine_distinct_honest_claims(rng):
    from distproof.mle import MultilinearTable
    t = MultilinearTable.from_values(BN254, [rng.randrange(P) for _ in range(8)])
    claims = []
    for _ in range(3):
        z = tuple(rng.randrange(P) for _ in range(3))
        claims.append(LayerClaim.at(2, z, mle_eval(t, z).value))
    out, _ = combine_claims(claims, Transcript(BN254))
    assert out.holds_for(t)
    wrong = claims[:2] + [LayerClaim.at(2, claims[2].point, (claims[2].value + 1) % P)]
    assert not combine_claims(wrong, Transcript(BN254))[0].holds_for(t)


def test_combine_rejects_mixed_layers():
    with pytest.raises(GkrError):
        combine_claims([LayerClaim.at(1, (1,), 1), LayerClaim.at(2, (1,), 1)], Transcript(BN254))


def test_toy_field_adder():
    c = accumulation_adder(4)
    proof, verdict = run(c, [90, 5, 1, 3], field=TOY97)
    assert proof.outputs == (2,) and verdict.accept
