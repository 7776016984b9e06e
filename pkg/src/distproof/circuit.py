"""General arithmetic circuits with accumulation gates.

Layer 0 is the input layer (user inputs followed by constants); layer
``depth`` is the output layer. Every gate is an accumulation gate holding
one or more fan-in-2 nested gates, and a nested gate may read any earlier
layer. A plain gate is the one-nested-gate case.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

from .field import FieldConfig, FieldElement
from .mle import MultilinearTable, next_pow2
from .sumcheck import ADD, MUL, LayerWire

KINDS = (ADD, MUL)


class CircuitError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class WireRef:
    layer: int
    gate: int


@dataclass(frozen=True)
class NestedGate:
    kind: str
    left: WireRef
    right: WireRef


@dataclass(frozen=True)
class AccumulationGate:
    nested: tuple[NestedGate, ...]

    @classmethod
    def plain(cls, kind: str, left: WireRef, right: WireRef) -> "AccumulationGate":
        return cls((NestedGate(kind, left, right),))


@dataclass(frozen=True)
class GeneralCircuit:
    input_size: int
    layers: tuple[tuple[AccumulationGate, ...], ...]
    constants: tuple[int, ...] = ()
    # per (consumer, source) layer pair: sorted indexes of source gates actually read
    declared_index_maps: dict[tuple[int, int], tuple[int, ...]] | None = field(default=None, compare=False)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def width(self, layer: int) -> int:
        if layer == 0:
            return self.input_size + len(self.constants)
        return len(self.layers[layer - 1])

    def padded_width(self, layer: int) -> int:
        return next_pow2(self.width(layer))

    def num_vars(self, layer: int) -> int:
        return self.padded_width(layer).bit_length() - 1

    @property
    def output_size(self) -> int:
        return self.width(self.depth)

    @cached_property
    def index_maps(self) -> dict[tuple[int, int], tuple[int, ...]]:
        return compute_index_maps(self)

    def wire_groups(self, layer: int) -> dict[tuple[int, int], list[LayerWire]]:
        """Wires of ``layer`` grouped by (left source layer, right source layer)."""
        groups: dict[tuple[int, int], list[LayerWire]] = defaultdict(list)
        for g, gate in enumerate(self.layers[layer - 1]):
            for n in gate.nested:
                groups[(n.left.layer, n.right.layer)].append(LayerWire(n.kind, g, n.left.gate, n.right.gate))
        return dict(sorted(groups.items()))

    def wire_count(self, layer: int) -> int:
        return sum(len(g.nested) for g in self.layers[layer - 1])


def compute_index_maps(c: GeneralCircuit) -> dict[tuple[int, int], tuple[int, ...]]:
    used: dict[tuple[int, int], set[int]] = defaultdict(set)
    for i, layer in enumerate(c.layers, start=1):
        for gate in layer:
            for n in gate.nested:
                used[(i, n.left.layer)].add(n.left.gate)
                used[(i, n.right.layer)].add(n.right.gate)
    return {k: tuple(sorted(v)) for k, v in sorted(used.items())}


def compact_index(c: GeneralCircuit, consumer: int, source: int, gate: int) -> int:
    """Dense index of ``gate`` among the gates of ``source`` read by ``consumer``."""
    used = c.index_maps[(consumer, source)]
    lo, hi = 0, len(used)
    while lo < hi:
        mid = (lo + hi) // 2
        if used[mid] < gate:
            lo = mid + 1
        else:
            hi = mid
    if lo == len(used) or used[lo] != gate:
        raise KeyError(f"gate {gate} of layer {source} is not read by layer {consumer}")
    return lo


def validate(c: GeneralCircuit) -> list[str]:
    """Return wiring violations; an empty list means the circuit is valid."""
    problems: list[str] = []
    if c.input_size < 0:
        problems.append("negative input size")
    if c.width(0) < 1:
        problems.append("input layer is empty")
    for i, layer in enumerate(c.layers, start=1):
        if not layer:
            problems.append(f"layer {i}: empty layer")
            continue
        reads_prev = False
        for g, gate in enumerate(layer):
            if not gate.nested:
                problems.append(f"layer {i} gate {g}: accumulation gate without nested gates")
            for t, n in enumerate(gate.nested):
                where = f"layer {i} gate {g} nested {t}"
                if n.kind not in KINDS:
                    problems.append(f"{where}: unknown kind {n.kind!r}")
                for side, ref in (("left", n.left), ("right", n.right)):
                    if ref.layer >= i:
                        problems.append(f"{where}: non-causal wire ({side} reads layer {ref.layer})")
                    elif ref.layer < 0:
                        problems.append(f"{where}: {side} reads negative layer")
                    elif not 0 <= ref.gate < c.width(ref.layer):
                        problems.append(f"{where}: dangling wire ({side} -> {ref.layer}:{ref.gate})")
                    elif ref.layer == i - 1:
                        reads_prev = True
        if not reads_prev:
            problems.append(f"layer {i}: no wire into layer {i - 1}")
    if c.declared_index_maps is not None and not problems:
        actual = compute_index_maps(c)
        declared = {k: tuple(v) for k, v in c.declared_index_maps.items()}
        if declared != actual:
            problems.append("index map mismatch: declared maps do not cover exactly the used gates")
    return problems


def check(c: GeneralCircuit) -> GeneralCircuit:
    problems = validate(c)
    if problems:
        raise CircuitError("; ".join(problems))
    return c


def evaluate(c: GeneralCircuit, inputs: Sequence[int | FieldElement], field: FieldConfig) -> list[MultilinearTable]:
    """Per-layer value tables, padded with zeros to powers of two. Index 0 is the input layer."""
    if len(inputs) != c.input_size:
        raise CircuitError(f"expected {c.input_size} inputs, got {len(inputs)}")
    check(c)
    p = field.modulus
    vals: list[list[int]] = [field.coerce_all(inputs) + [v % p for v in c.constants]]
    for layer in c.layers:
        row = []
        for gate in layer:
            acc = 0
            for n in gate.nested:
                a = vals[n.left.layer][n.left.gate]
                b = vals[n.right.layer][n.right.gate]
                acc += a * b if n.kind == MUL else a + b
            row.append(acc % p)
        vals.append(row)
    return [MultilinearTable(field, tuple(v + [0] * (next_pow2(len(v)) - len(v)))) for v in vals]


def outputs(c: GeneralCircuit, inputs: Sequence[int | FieldElement], field: FieldConfig) -> list[int]:
    return list(evaluate(c, inputs, field)[-1].values[: c.output_size])


def is_layered(c: GeneralCircuit) -> bool:
    return all(
        len(gate.nested) == 1 and all(r.layer == i - 1 for r in (gate.nested[0].left, gate.nested[0].right))
        for i, layer in enumerate(c.layers, start=1)
        for gate in layer
    )


def _ceil_log2(k: int) -> int:
    return (k - 1).bit_length()


def expand_accumulations(c: GeneralCircuit) -> GeneralCircuit:
    """Equivalent circuit with one nested gate per gate and adjacent-layer wiring only.

    Each accumulation gate becomes its nested gates followed by a binary add
    tree; values read from older layers are carried forward by relay gates
    ``add(v, 0)``. A zero constant is appended to the inputs and carried
    through every non-output layer to feed the relays.
    """
    check(c)
    if c.depth == 0:
        return c
    L = c.depth
    band = [0] + [max(1 + _ceil_log2(len(g.nested)) for g in layer) for layer in c.layers]
    last_use: dict[tuple[int, int], int] = {}
    for i, layer in enumerate(c.layers, start=1):
        for gate in layer:
            for n in gate.nested:
                for r in (n.left, n.right):
                    key = (r.layer, r.gate)
                    last_use[key] = max(last_use.get(key, 0), i)

    zero_key = ("z",)
    n_in = c.width(0)
    prev: dict[Any, int] = {("o", 0, g): g for g in range(n_in)}
    prev[zero_key] = n_in
    new_layers: list[tuple[AccumulationGate, ...]] = []

    def add_gate(row: list, index: dict, key, kind: str, a: int, b: int) -> None:
        e = len(new_layers)  # the layer being built reads layer e
        index[key] = len(row)
        row.append(AccumulationGate.plain(kind, WireRef(e, a), WireRef(e, b)))

    for i, layer in enumerate(c.layers, start=1):
        partial: list[list[Any]] = [[] for _ in layer]
        for level in range(band[i]):
            final_output = i == L and level == band[i] - 1
            row: list[AccumulationGate] = []
            index: dict[Any, int] = {}
            for g, gate in enumerate(layer):
                last = level == band[i] - 1
                if level == 0:
                    items = [("n", i, g, t) for t in range(len(gate.nested))]
                    if last:
                        assert len(items) == 1
                        items = [("o", i, g)]
                    for t, n in enumerate(gate.nested):
                        add_gate(row, index, items[0] if last else items[t], n.kind,
                                 prev[("o", n.left.layer, n.left.gate)], prev[("o", n.right.layer, n.right.gate)])
                    partial[g] = items
                    continue
                cur = partial[g]
                nxt = []
                for t in range(0, len(cur), 2):
                    key = ("o", i, g) if last else ("t", i, g, level, t)
                    if t + 1 < len(cur):
                        add_gate(row, index, key, ADD, prev[cur[t]], prev[cur[t + 1]])
                    else:
                        add_gate(row, index, key, ADD, prev[cur[t]], prev[zero_key])
                    nxt.append(key)
                partial[g] = nxt
            if not final_output:
                for (j, g), lu in sorted(last_use.items()):
                    if j <= i - 1 and lu > i:
                        add_gate(row, index, ("o", j, g), ADD, prev[("o", j, g)], prev[zero_key])
                add_gate(row, index, zero_key, ADD, prev[zero_key], prev[zero_key])
            new_layers.append(tuple(row))
            prev = index
    return GeneralCircuit(c.input_size, tuple(new_layers), tuple(c.constants) + (0,))


# -- interchange format ---------------------------------------------------------

def _ref_to_json(r: WireRef) -> list[int]:
    return [r.layer, r.gate]


def to_dict(c: GeneralCircuit) -> dict:
    layers = []
    for layer in c.layers:
        gates = []
        for gate in layer:
            nested = [{"kind": n.kind, "left": _ref_to_json(n.left), "right": _ref_to_json(n.right)} for n in gate.nested]
            gates.append({"nested": nested})
        layers.append(gates)
    return {"input_size": c.input_size, "constants": list(c.constants), "layers": layers}


def from_dict(d: dict) -> GeneralCircuit:
    try:
        layers = []
        for layer in d["layers"]:
            gates = []
            for gate in layer:
                specs = gate["nested"] if "nested" in gate else [gate]
                nested = tuple(
                    NestedGate(s["kind"], WireRef(*map(int, s["left"])), WireRef(*map(int, s["right"])))
                    for s in specs
                )
                gates.append(AccumulationGate(nested))
            layers.append(tuple(gates))
        maps = None
        if "index_maps" in d:
            maps = {tuple(int(x) for x in k.split(",")): tuple(v) for k, v in d["index_maps"].items()}
        return GeneralCircuit(int(d["input_size"]), tuple(layers), tuple(int(x) for x in d.get("constants", [])), maps)
    except (KeyError, TypeError) as exc:
        raise CircuitError(f"malformed circuit description: {exc!r}") from exc


def dumps(c: GeneralCircuit) -> str:
    return json.dumps(to_dict(c))


def loads(text: str) -> GeneralCircuit:
    return from_dict(json.loads(text))


# -- generators -------------------------------------------------------------------

def accumulation_adder(k: int) -> GeneralCircuit:
    """One accumulation gate summing ``k`` inputs (``k = 4`` is the four-number adder)."""
    if k < 1:
        raise CircuitError("need at least one input")
    constants: tuple[int, ...] = ()
    refs = [WireRef(0, g) for g in range(k)]
    if k % 2:
        constants = (0,)
        refs.append(WireRef(0, k))
    nested = tuple(NestedGate(ADD, refs[t], refs[t + 1]) for t in range(0, len(refs), 2))
    return GeneralCircuit(k, ((AccumulationGate(nested),),), constants)


def layered_adder(k: int) -> GeneralCircuit:
    """Binary add tree over ``k`` inputs (``k`` a power of two >= 2), one nested gate per gate."""
    if k < 2 or k & (k - 1):
        raise CircuitError("k must be a power of two >= 2")
    layers = []
    width = k
    e = 0
    while width > 1:
        layers.append(tuple(AccumulationGate.plain(ADD, WireRef(e, 2 * g), WireRef(e, 2 * g + 1)) for g in range(width // 2)))
        width //= 2
        e += 1
    return GeneralCircuit(k, tuple(layers))


def identity_circuit(n: int) -> GeneralCircuit:
    """``add(x_g, 0)`` for each input, reading a constant-zero input gate."""
    zero = WireRef(0, n)
    return GeneralCircuit(n, (tuple(AccumulationGate.plain(ADD, WireRef(0, g), zero) for g in range(n)),), (0,))


def random_circuit(rng: random.Random, depth: int, max_width: int, input_size: int | None = None,
                   max_nested: int = 3, accumulate: bool = True, general: bool = True) -> GeneralCircuit:
    """Random valid circuit; the first nested gate of gate 0 always reads the previous layer."""
    widths = [input_size or rng.randint(1, max_width)]
    layers = []
    for i in range(1, depth + 1):
        w = rng.randint(1, max_width)
        gates = []
        for g in range(w):
            k = rng.randint(1, max_nested) if accumulate else 1
            nested = []
            for t in range(k):
                refs = []
                for _ in range(2):
                    if not general or rng.random() < 0.5:
                        j = i - 1
                    else:
                        j = rng.randrange(i)
                    refs.append(WireRef(j, rng.randrange(widths[j])))
                if g == 0 and t == 0:
                    refs[0] = WireRef(i - 1, rng.randrange(widths[i - 1]))
                nested.append(NestedGate(rng.choice(KINDS), refs[0], refs[1]))
            gates.append(AccumulationGate(tuple(nested)))
        widths.append(w)
        layers.append(tuple(gates))
    return GeneralCircuit(widths[0], tuple(layers))


def reference_outputs(c: GeneralCircuit, inputs: Iterable[int], p: int) -> list[int]:
    """Independent recursive interpreter: evaluates each output gate by walking its wires."""
    inputs = list(inputs) + list(c.constants)
    memo: dict[tuple[int, int], int] = {}

    def value(layer: int, gate: int) -> int:
        if layer == 0:
            return inputs[gate] % p
        key = (layer, gate)
        if key not in memo:
            total = 0
            for n in c.layers[layer - 1][gate].nested:
                a, b = value(n.left.layer, n.left.gate), value(n.right.layer, n.right.gate)
                total += a * b if n.kind == MUL else a + b
            memo[key] = total % p
        return memo[key]

    return [value(c.depth, g) for g in range(c.output_size)] if c.depth else [v % p for v in inputs]
