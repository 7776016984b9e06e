"""Transparent Merkle commitment to a matrix of per-worker evaluation rows.

Row ``i`` holds the hypercube evaluations of worker ``i``'s share, so the
full polynomial is ``f(x, bits(i)) = row_i[x]``. Column ``j`` (the ``j``-th
entry of every row) is hashed to one leaf, and the commitment is the
Merkle root over column digests.

An opening at ``r = (r_low, r_high)`` carries each row's evaluation at
``r_low``. To tie those to the committed columns the verifier draws row
weights ``gamma`` from the transcript; the prover sends the combined row
``u = sum_i gamma_i row_i``, and the verifier checks
``<chi(r_low), u> == sum_i gamma_i y_i`` plus ``q`` spot-checked columns of
``u`` against authenticated columns. There is no low-degree encoding, so a
forger who edits one entry of ``u`` escapes with probability about
``1 - q / row_len``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

from .field import FieldConfig, FieldElement
from .merkle import MerkleTree, sha256, verify_path
from .mle import MultilinearTable, eq_table, eval_values, log2_exact
from .transcript import Transcript

DEFAULT_QUERIES = 32
DIGEST_SIZE = 32


class CommitmentError(ValueError):
    pass


@dataclass(frozen=True)
class EvalMatrix:
    field: FieldConfig
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise CommitmentError("matrix has no rows")
        n = len(self.rows[0])
        if any(len(r) != n for r in self.rows):
            raise CommitmentError("ragged rows")
        try:
            log2_exact(n)
            log2_exact(len(self.rows))
        except ValueError as exc:
            raise CommitmentError(str(exc)) from None

    @classmethod
    def from_rows(cls, field: FieldConfig, rows: Sequence[Sequence[int | FieldElement] | MultilinearTable]) -> "EvalMatrix":
        out = []
        for r in rows:
            out.append(r.values if isinstance(r, MultilinearTable) else tuple(field.coerce_all(r)))
        return cls(field, tuple(out))

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def row_len(self) -> int:
        return len(self.rows[0])

    @property
    def num_vars(self) -> int:
        return (self.row_len * self.num_rows).bit_length() - 1

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.rows]

    def column_bytes(self, j: int) -> bytes:
        return self.field.encode_all(r[j] for r in self.rows)

    def flat(self) -> MultilinearTable:
        """Row-major concatenation: worker index occupies the high variables."""
        return MultilinearTable(self.field, tuple(v for r in self.rows for v in r))


@dataclass(frozen=True)
class Commitment:
    root: bytes
    num_rows: int
    row_len: int
    field_name: str

    def to_bytes(self) -> bytes:
        return self.root


def _tree(m: EvalMatrix) -> MerkleTree:
    return MerkleTree([sha256(m.column_bytes(j)) for j in range(m.row_len)])


def commit(m: EvalMatrix) -> Commitment:
    return Commitment(_tree(m).root, m.num_rows, m.row_len, m.field.name)


@dataclass(frozen=True)
class ColumnOpening:
    index: int
    values: tuple[int, ...]
    path: tuple[bytes, ...]


@dataclass(frozen=True)
class Opening:
    point: tuple[int, ...]
    value: int
    row_evals: tuple[int, ...]
    combined_row: tuple[int, ...]
    columns: tuple[ColumnOpening, ...]

    def to_bytes(self, field: FieldConfig) -> bytes:
        out = [struct.pack("<III", len(self.point), len(self.row_evals), len(self.columns)),
               field.encode_all(self.point), field.encode(self.value), field.encode_all(self.row_evals),
               struct.pack("<I", len(self.combined_row)), field.encode_all(self.combined_row)]
        for col in self.columns:
            out.append(struct.pack("<II", col.index, len(col.path)))
            out.append(field.encode_all(col.values))
            out.extend(col.path)
        return b"".join(out)


def _split_point(r: Sequence[int], row_len: int, num_rows: int) -> tuple[list[int], list[int]]:
    n_low = row_len.bit_length() - 1
    n_high = num_rows.bit_length() - 1
    if len(r) != n_low + n_high:
        raise CommitmentError(f"point has {len(r)} coordinates, expected {n_low + n_high}")
    return list(r[:n_low]), list(r[n_low:])


def _bind(transcript: Transcript, root: bytes, point: Sequence[int], row_evals: Sequence[int]) -> None:
    transcript.absorb(b"pc-root", root)
    transcript.absorb_ints(b"pc-point", point)
    transcript.absorb_ints(b"pc-rows", row_evals)


def open_at(m: EvalMatrix, r: Sequence[int | FieldElement], transcript: Transcript,
            queries: int = DEFAULT_QUERIES, tree: MerkleTree | None = None) -> Opening:
    """Open the committed matrix at ``r``; ``value = sum_i beta(r_high, i) * row_i(r_low)``."""
    field = m.field
    p = field.modulus
    point = field.coerce_all(r)
    r_low, r_high = _split_point(point, m.row_len, m.num_rows)
    tree = tree or _tree(m)
    row_evals = [eval_values(row, r_low, p) for row in m.rows]
    beta = eq_table(r_high, p)
    value = sum(b * y for b, y in zip(beta, row_evals)) % p
    _bind(transcript, tree.root, point, row_evals)
    gamma = transcript.challenges(m.num_rows, b"pc-gamma")
    combined = [sum(g * row[j] for g, row in zip(gamma, m.rows)) % p for j in range(m.row_len)]
    transcript.absorb_ints(b"pc-combined", combined)
    idx = transcript.challenge_indices(queries, m.row_len, b"pc-queries")
    cols = tuple(ColumnOpening(j, tuple(m.column(j)), tuple(tree.path(j))) for j in idx)
    return Opening(tuple(point), value, tuple(row_evals), tuple(combined), cols)


# read as ``pcs.open``; module-level code here never needs the builtin
open = open_at  # noqa: A001


def verify_open(com: Commitment, r: Sequence[int | FieldElement], opening: Opening, transcript: Transcript,
                queries: int = DEFAULT_QUERIES) -> bool:
    field = transcript.field
    p = field.modulus
    try:
        point = field.coerce_all(r)
        r_low, r_high = _split_point(point, com.row_len, com.num_rows)
    except CommitmentError:
        return False
    if tuple(point) != opening.point or len(opening.row_evals) != com.num_rows:
        return False
    if len(opening.combined_row) != com.row_len:
        return False
    vals = [opening.value, *opening.row_evals, *opening.combined_row]
    if any(not 0 <= v < p for v in vals):
        return False
    beta = eq_table(r_high, p)
    if sum(b * y for b, y in zip(beta, opening.row_evals)) % p != opening.value:
        return False
    _bind(transcript, com.root, point, opening.row_evals)
    gamma = transcript.challenges(com.num_rows, b"pc-gamma")
    chi = eq_table(r_low, p)
    if sum(c * u for c, u in zip(chi, opening.combined_row)) % p != sum(g * y for g, y in zip(gamma, opening.row_evals)) % p:
        return False
    transcript.absorb_ints(b"pc-combined", opening.combined_row)
    idx = transcript.challenge_indices(queries, com.row_len, b"pc-queries")
    if [c.index for c in opening.columns] != idx:
        return False
    depth = com.row_len.bit_length() - 1
    for col in opening.columns:
        if len(col.values) != com.num_rows or len(col.path) != depth:
            return False
        if any(not 0 <= v < p for v in col.values):
            return False
        leaf = sha256(field.encode_all(col.values))
        if not verify_path(com.root, leaf, col.index, col.path):
            return False
        if sum(g * v for g, v in zip(gamma, col.values)) % p != opening.combined_row[col.index]:
            return False
    return True
