"""Linear-time sumcheck for sums of products of multilinear tables.

The prover keeps one bookkeeping table per factor and halves every table
after each challenge, so round ``j`` costs O(2^(l-j)). Round polynomials
are sent as four coefficients (degree cap 3); product sums only ever use
degree 2, and the verifier enforces that bound.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .counters import OpCounter, tick
from .field import FieldConfig, FieldElement
from .mle import MultilinearTable, beta_bits, eq_table, fold_values
from .transcript import Transcript

MAX_COEFFS = 4


class SumcheckError(ValueError):
    pass


@dataclass(frozen=True)
class RoundPolynomial:
    coeffs: tuple[int, int, int, int]

    def __call__(self, x: int, p: int) -> int:
        c0, c1, c2, c3 = self.coeffs
        return (c0 + x * (c1 + x * (c2 + x * c3))) % p

    @property
    def degree(self) -> int:
        for d in range(3, 0, -1):
            if self.coeffs[d]:
                return d
        return 0

    def to_bytes(self, field: FieldConfig) -> bytes:
        return field.encode_all(self.coeffs)


@dataclass(frozen=True)
class SumcheckProof:
    field: FieldConfig
    claimed_sum: int
    rounds: tuple[RoundPolynomial, ...]
    final_evals: tuple[int, ...]

    @property
    def num_vars(self) -> int:
        return len(self.rounds)

    def to_bytes(self) -> bytes:
        f = self.field
        out = [f.encode(self.claimed_sum), struct.pack("<I", len(self.rounds))]
        out += [r.to_bytes(f) for r in self.rounds]
        out.append(struct.pack("<I", len(self.final_evals)))
        out.append(f.encode_all(self.final_evals))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, field: FieldConfig, data: bytes) -> "SumcheckProof":
        w = field.byte_len
        claimed = field.decode(data[:w])
        pos = w
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        rounds = []
        for _ in range(n):
            c = field.decode_all(data[pos:pos + MAX_COEFFS * w])
            rounds.append(RoundPolynomial(tuple(c)))
            pos += MAX_COEFFS * w
        (m,) = struct.unpack_from("<I", data, pos)
        pos += 4
        finals = field.decode_all(data[pos:pos + m * w])
        if pos + m * w != len(data):
            raise SumcheckError("trailing bytes in proof")
        return cls(field, claimed, tuple(rounds), tuple(finals))

    def replace(self, **kw) -> "SumcheckProof":
        d = dict(field=self.field, claimed_sum=self.claimed_sum, rounds=self.rounds, final_evals=self.final_evals)
        d.update(kw)
        return SumcheckProof(**d)


class ProductProver:
    """Bookkeeping-table state for ``sum_k sum_x f_k(x) * g_k(x)``."""

    def __init__(self, pairs: Sequence[tuple[Sequence[int], Sequence[int]]], p: int,
                 counter: OpCounter | None = None) -> None:
        if not pairs:
            raise SumcheckError("need at least one pair of tables")
        size = len(pairs[0][0])
        for f, g in pairs:
            if len(f) != size or len(g) != size:
                raise SumcheckError("all tables must have the same size")
        if size & (size - 1):
            raise SumcheckError("table size must be a power of two")
        self.p = p
        self.tables = [(list(f), list(g)) for f, g in pairs]
        self.counter = counter

    @property
    def size(self) -> int:
        return len(self.tables[0][0])

    def total(self) -> int:
        p = self.p
        return sum(sum(a * b for a, b in zip(f, g)) for f, g in self.tables) % p

    def round_poly(self) -> RoundPolynomial:
        p = self.p
        c0 = c1 = c2 = 0
        for f, g in self.tables:
            for b in range(0, len(f), 2):
                f0 = f[b]
                g0 = g[b]
                df = f[b + 1] - f0
                dg = g[b + 1] - g0
                c0 += f0 * g0
                c1 += f0 * dg + df * g0
                c2 += df * dg
        tick(self.counter, "table_touch", 2 * len(self.tables) * self.size)
        return RoundPolynomial((c0 % p, c1 % p, c2 % p, 0))

    def fix(self, r: int) -> None:
        p = self.p
        self.tables = [(fold_values(f, r, p), fold_values(g, r, p)) for f, g in self.tables]
        tick(self.counter, "table_touch", 2 * len(self.tables) * 2 * self.size)

    def finals(self) -> list[int]:
        if self.size != 1:
            raise SumcheckError("tables not fully folded")
        out = []
        for f, g in self.tables:
            out += [f[0], g[0]]
        return out


def run_rounds(prover: ProductProver, num_rounds: int, transcript: Transcript,
               rounds: list[RoundPolynomial], point: list[int]) -> None:
    for _ in range(num_rounds):
        poly = prover.round_poly()
        transcript.absorb(b"round", poly.to_bytes(transcript.field))
        r = transcript.challenge()
        prover.fix(r)
        rounds.append(poly)
        point.append(r)


def _raw_pairs(pairs) -> tuple[FieldConfig, list[tuple[tuple[int, ...], tuple[int, ...]]]]:
    if not pairs:
        raise SumcheckError("need at least one pair of tables")
    field = pairs[0][0].field
    raw = []
    for f, g in pairs:
        if f.field.modulus != field.modulus or g.field.modulus != field.modulus:
            raise SumcheckError("tables over different fields")
        if f.num_vars != g.num_vars or f.num_vars != pairs[0][0].num_vars:
            raise SumcheckError("mixed table sizes")
        raw.append((f.values, g.values))
    return field, raw


def prove_product_sum(pairs: Sequence[tuple[MultilinearTable, MultilinearTable]], transcript: Transcript,
                      counter: OpCounter | None = None) -> SumcheckProof:
    """Prove ``sum_k sum_x f_k(x) g_k(x)`` for the given table pairs."""
    field, raw = _raw_pairs(pairs)
    prover = ProductProver(raw, field.modulus, counter)
    claimed = prover.total()
    transcript.absorb_element(b"claim", claimed)
    rounds: list[RoundPolynomial] = []
    point: list[int] = []
    run_rounds(prover, pairs[0][0].num_vars, transcript, rounds, point)
    finals = prover.finals()
    transcript.absorb_ints(b"finals", finals)
    return SumcheckProof(field, claimed, tuple(rounds), tuple(finals))


class SumcheckVerdict(NamedTuple):
    accept: bool
    final_point: list[int]
    expected: list[int]
    final_claim: int
    reason: str = ""


def check_rounds(claim: int, rounds: Iterable[RoundPolynomial], transcript: Transcript,
                 max_degree: int, point: list[int]) -> tuple[bool, int, str]:
    """Replay rounds, appending challenges to ``point``; returns (ok, running claim, reason)."""
    field = transcript.field
    p = field.modulus
    for j, poly in enumerate(rounds):
        if len(poly.coeffs) != MAX_COEFFS or any(not 0 <= c < p for c in poly.coeffs):
            return False, claim, f"round {j}: malformed coefficients"
        if poly.degree > max_degree:
            return False, claim, f"round {j}: degree {poly.degree} > {max_degree}"
        if (poly(0, p) + poly(1, p)) % p != claim:
            return False, claim, f"round {j}: g(0)+g(1) != claim"
        transcript.absorb(b"round", poly.to_bytes(field))
        r = transcript.challenge()
        point.append(r)
        claim = poly(r, p)
    return True, claim, ""


def verify_product_sum(claim: int | FieldElement, proof: SumcheckProof, transcript: Transcript,
                       num_vars: int | None = None) -> SumcheckVerdict:
    """Check a product-sum proof. Rejection is reported, never raised.

    The caller still has to check ``expected`` (``[f_1(r), g_1(r), ...]``)
    against the real polynomials at ``final_point``.
    """
    field = transcript.field
    p = field.modulus
    claim = field.coerce(claim)
    if proof.field.modulus != p:
        return SumcheckVerdict(False, [], [], 0, "field mismatch")
    if num_vars is not None and proof.num_vars != num_vars:
        return SumcheckVerdict(False, [], [], 0, "round count mismatch")
    if proof.claimed_sum != claim:
        return SumcheckVerdict(False, [], [], 0, "claimed sum differs from claim")
    if not proof.final_evals or len(proof.final_evals) % 2:
        return SumcheckVerdict(False, [], [], 0, "final evaluations must come in pairs")
    transcript.absorb_element(b"claim", claim)
    point: list[int] = []
    ok, running, reason = check_rounds(claim, proof.rounds, transcript, 2, point)
    if not ok:
        return SumcheckVerdict(False, point, [], running, reason)
    finals = list(proof.final_evals)
    if any(not 0 <= v < p for v in finals):
        return SumcheckVerdict(False, point, [], running, "non-canonical final evaluation")
    total = sum(finals[i] * finals[i + 1] for i in range(0, len(finals), 2)) % p
    transcript.absorb_ints(b"finals", finals)
    if total != running:
        return SumcheckVerdict(False, point, finals, running, "final products do not match last claim")
    return SumcheckVerdict(True, point, finals, running)


# -- two-phase sumcheck for one circuit layer ---------------------------------

ADD = "add"
MUL = "mul"


class LayerWire(NamedTuple):
    """One nested gate: ``out`` reads ``left`` from the left table and ``right`` from the right one."""

    kind: str
    out: int
    left: int
    right: int


def layer_sum(wires: Sequence[LayerWire], weights: Sequence[int], left: Sequence[int],
              right: Sequence[int], p: int) -> int:
    acc = 0
    for w in wires:
        if w.kind == MUL:
            acc += weights[w.out] * left[w.left] * right[w.right]
        else:
            acc += weights[w.out] * (left[w.left] + right[w.right])
    return acc % p


def _check_wires(wires, n_out, n_left, n_right) -> None:
    for w in wires:
        if w.kind not in (ADD, MUL):
            raise SumcheckError(f"unknown gate kind {w.kind!r}")
        if not (0 <= w.out < n_out and 0 <= w.left < n_left and 0 <= w.right < n_right):
            raise SumcheckError(f"predicate index out of range: {w}")


def two_phase_layer_sumcheck(wires: Sequence[LayerWire], v_tables: tuple[MultilinearTable, MultilinearTable],
                             transcript: Transcript, out_weights: Sequence[int] | None = None,
                             counter: OpCounter | None = None) -> SumcheckProof:
    return prove_layer(wires, v_tables, transcript, out_weights, counter)[0]


def prove_layer(wires: Sequence[LayerWire], v_tables: tuple[MultilinearTable, MultilinearTable],
                transcript: Transcript, out_weights: Sequence[int] | None = None,
                counter: OpCounter | None = None) -> tuple[SumcheckProof, list[int], list[int]]:
    """Sumcheck over (x, y) of ``sum_g w(g) [add(g,x,y)(V(x)+U(y)) + mult(g,x,y) V(x) U(y)]``.

    Phase one folds x with ``h(x)`` tables built from the wire list, phase
    two folds y with tables built from ``beta(r_x, .)``. ``out_weights``
    defaults to all ones (the plain sum of the layer's outputs). The proof's
    ``final_evals`` are ``(V(r_x), U(r_y))``.
    """
    vl, vr = v_tables
    field = vl.field
    p = field.modulus
    if out_weights is None:
        n_out = 1 + max((w.out for w in wires), default=0)
        weights = [1] * n_out
    else:
        weights = [x % p for x in out_weights]
        n_out = len(weights)
    _check_wires(wires, n_out, len(vl), len(vr))
    left, right = vl.values, vr.values
    claimed = layer_sum(wires, weights, left, right, p)
    transcript.absorb_element(b"claim", claimed)

    ones_x = [1] * len(left)
    a1 = [0] * len(left)
    a2 = [0] * len(left)
    for w in wires:
        wg = weights[w.out]
        if w.kind == MUL:
            a1[w.left] += wg * right[w.right]
        else:
            a1[w.left] += wg
            a2[w.left] += wg * right[w.right]
    tick(counter, "wire_touch", len(wires))
    tick(counter, "table_touch", 2 * len(left))
    prover = ProductProver([(left, [v % p for v in a1]), (ones_x, [v % p for v in a2])], p, counter)
    rounds: list[RoundPolynomial] = []
    r_x: list[int] = []
    run_rounds(prover, vl.num_vars, transcript, rounds, r_x)
    va = prover.tables[0][0][0]
    transcript.absorb_element(b"left-eval", va)

    bx = eq_table(r_x, p)
    b1 = [0] * len(right)
    b2 = [0] * len(right)
    for w in wires:
        c = weights[w.out] * bx[w.left]
        if w.kind == MUL:
            b1[w.right] += c * va
        else:
            b1[w.right] += c
            b2[w.right] += c * va
    tick(counter, "wire_touch", len(wires))
    tick(counter, "table_touch", 2 * len(left) + 2 * len(right))
    prover = ProductProver([(right, [v % p for v in b1]), ([1] * len(right), [v % p for v in b2])], p, counter)
    r_y: list[int] = []
    run_rounds(prover, vr.num_vars, transcript, rounds, r_y)
    vb = prover.tables[0][0][0]
    transcript.absorb_element(b"right-eval", vb)
    return SumcheckProof(field, claimed, tuple(rounds), (va, vb)), r_x, r_y


class LayerVerdict(NamedTuple):
    accept: bool
    r_x: list[int]
    r_y: list[int]
    final_claim: int
    reason: str = ""


def verify_two_phase(claim: int, proof: SumcheckProof, num_x: int, num_y: int,
                     transcript: Transcript) -> LayerVerdict:
    """Replay a two-phase proof's rounds. The final predicate check is the caller's."""
    p = transcript.field.modulus
    if proof.claimed_sum != claim % p:
        return LayerVerdict(False, [], [], 0, "claimed sum differs from claim")
    if proof.num_vars != num_x + num_y or len(proof.final_evals) != 2:
        return LayerVerdict(False, [], [], 0, "proof shape mismatch")
    va, vb = proof.final_evals
    if not (0 <= va < p and 0 <= vb < p):
        return LayerVerdict(False, [], [], 0, "non-canonical final evaluation")
    transcript.absorb_element(b"claim", claim)
    r_x: list[int] = []
    ok, running, reason = check_rounds(claim, proof.rounds[:num_x], transcript, 2, r_x)
    if not ok:
        return LayerVerdict(False, r_x, [], running, reason)
    transcript.absorb_element(b"left-eval", va)
    r_y: list[int] = []
    ok, running, reason = check_rounds(running, proof.rounds[num_x:], transcript, 2, r_y)
    if not ok:
        return LayerVerdict(False, r_x, r_y, running, reason)
    transcript.absorb_element(b"right-eval", vb)
    return LayerVerdict(True, r_x, r_y, running)


def expected_layer_claim(wires: Sequence[LayerWire], weight_of, r_x: Sequence[int], r_y: Sequence[int],
                         va: int, vb: int, p: int) -> int:
    """Evaluate the sparse add/mult predicates at ``(r_x, r_y)`` against the claimed V values.

    ``weight_of(g)`` returns the output weight of boolean gate ``g``. Cost is
    linear in the wire list; no dense table is touched.
    """
    bx: dict[int, int] = {}
    by: dict[int, int] = {}
    wcache: dict[int, int] = {}
    add_part = mul_part = 0
    for w in wires:
        if w.left not in bx:
            bx[w.left] = beta_bits(r_x, w.left, p)
        if w.right not in by:
            by[w.right] = beta_bits(r_y, w.right, p)
        if w.out not in wcache:
            wcache[w.out] = weight_of(w.out) % p
        c = wcache[w.out] * bx[w.left] * by[w.right]
        if w.kind == MUL:
            mul_part += c
        else:
            add_part += c
    return (add_part * (va + vb) + mul_part * va * vb) % p
