"""Word-level combinational IR and the three circuit builders.

Gates are appended in topological order by construction; a completed netlist
is treated as immutable.  Values are unsigned words at the declared widths;
MUL/ADD/SUB/GT follow two's-complement semantics.  Conventions:

* bit 0 of a word is the least significant bit,
* CONCAT lists its operands most significant first,
* MUX(sel, a, b) yields ``a`` when sel is 1,
* LUT select operand q carries pattern weight 2**q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from nn2logic.fixedpoint import FixedPointFormat, from_int, quantize, signed_value

PROB_FRAC_BITS = 8  # leaf class probabilities as unsigned fixed point


def quantize_prob(p: float) -> int:
    """Unsigned integer vote weight of a leaf probability."""
    return min(1 << PROB_FRAC_BITS, int(round(p * (1 << PROB_FRAC_BITS))))


GATE_KINDS = (
    "CONST", "MUL", "ADD", "SUB", "GT", "GTU", "MUX", "SHR",
    "SEXT", "SLICE", "CONCAT", "CLIP", "LUT", "NOT", "AND", "OR", "XOR",
)


@dataclass(frozen=True)
class Gate:
    kind: str
    operands: tuple[int, ...]
    output: int
    params: tuple = ()


@dataclass
class Netlist:
    widths: list[int] = field(default_factory=list)
    names: list = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)
    inputs: list[int] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)

    def _new_signal(self, width: int, name=None) -> int:
        if width <= 0:
            raise ValueError("signal width must be positive")
        self.widths.append(width)
        self.names.append(name)
        return len(self.widths) - 1

    def add_input(self, width: int, name=None) -> int:
        sid = self._new_signal(width, name)
        self.inputs.append(sid)
        return sid

    def add_const(self, bits: str, name=None) -> int:
        sid = self._new_signal(len(bits), name)
        self.gates.append(Gate("CONST", (), sid, (bits,)))
        return sid

    def set_output(self, sid: int) -> None:
        self.outputs.append(sid)

    def width(self, sid: int) -> int:
        return self.widths[sid]

    def add_gate(self, kind: str, operands, params=(), name=None) -> int:
        operands = tuple(operands)
        for op in operands:
            if not 0 <= op < len(self.widths):
                raise ValueError(f"{kind}: operand signal {op} is not defined")
        width = self._infer_width(kind, operands, params)
        sid = self._new_signal(width, name)
        self.gates.append(Gate(kind, operands, sid, tuple(params)))
        return sid

    def _infer_width(self, kind: str, operands, params) -> int:
        w = [self.widths[o] for o in operands]
        if kind == "MUL":
            self._need(len(w) == 2 and w[0] == w[1], "MUL needs two equal-width operands")
            return 2 * w[0]
        if kind in ("ADD", "SUB"):
            self._need(len(w) == 2 and w[0] == w[1], f"{kind} needs two equal-width operands")
            return w[0]
        if kind in ("GT", "GTU"):
            self._need(len(w) == 2 and w[0] == w[1], f"{kind} needs two equal-width operands")
            return 1
        if kind == "MUX":
            self._need(
                len(w) == 3 and w[0] == 1 and w[1] == w[2],
                "MUX needs a 1-bit select and two equal-width data operands",
            )
            return w[1]
        if kind == "SHR":
            amount, _arith = params
            self._need(len(w) == 1 and 0 <= amount < w[0], "SHR amount out of range")
            return w[0]
        if kind == "SEXT":
            (to,) = params
            self._need(len(w) == 1 and to >= w[0], "SEXT target must not shrink")
            return to
        if kind == "SLICE":
            lo, hi = params
            self._need(len(w) == 1 and 0 <= lo <= hi < w[0], "SLICE range out of bounds")
            return hi - lo + 1
        if kind == "CONCAT":
            self._need(len(w) >= 1, "CONCAT needs at least one operand")
            return sum(w)
        if kind == "CLIP":
            (to,) = params
            self._need(len(w) == 1 and 0 < to <= w[0], "CLIP target must not grow")
            return to
        if kind == "LUT":
            table, k = params
            self._need(
                len(w) == k and all(x == 1 for x in w) and 0 <= table < (1 << (1 << k)),
                "LUT needs k 1-bit selects and a 2**k-entry table",
            )
            return 1
        if kind == "NOT":
            self._need(len(w) == 1, "NOT takes one operand")
            return w[0]
        if kind in ("AND", "OR", "XOR"):
            self._need(len(w) == 2 and w[0] == w[1], f"{kind} needs two equal-width operands")
            return w[0]
        raise ValueError(f"unknown gate kind {kind!r}")

    @staticmethod
    def _need(cond: bool, msg: str) -> None:
        if not cond:
            raise ValueError(msg)

    def dump(self) -> str:
        """One gate per line: `<out> = <KIND>(<args>)`, stable order."""

        def sig(sid: int) -> str:
            name = self.names[sid]
            return name if name else f"s{sid}"

        lines = [f"inputs {' '.join(sig(s) + ':' + str(self.widths[s]) for s in self.inputs)}"]
        for g in self.gates:
            args = [sig(o) for o in g.operands]
            if g.kind == "CONST":
                args = [g.params[0]]
            elif g.kind == "SHR":
                args += [f"amount={g.params[0]}", f"arith={int(g.params[1])}"]
            elif g.kind in ("SEXT", "CLIP"):
                args += [f"width={g.params[0]}"]
            elif g.kind == "SLICE":
                args += [f"lo={g.params[0]}", f"hi={g.params[1]}"]
            elif g.kind == "LUT":
                table, k = g.params
                args += [f"table={from_int(table, 1 << k)}"]
            lines.append(f"{sig(g.output)} = {g.kind}({', '.join(args)})")
        lines.append(f"outputs {' '.join(sig(s) for s in self.outputs)}")
        return "\n".join(lines) + "\n"


def simulate_netlist(net: Netlist, input_bits) -> list[str]:
    """Topological evaluation; returns one bit string per output."""
    if len(input_bits) != len(net.inputs):
        raise ValueError(f"expected {len(net.inputs)} inputs, got {len(input_bits)}")
    values: dict[int, int] = {}
    for sid, given in zip(net.inputs, input_bits):
        w = net.widths[sid]
        v = int(given, 2) if isinstance(given, str) else int(given)
        if isinstance(given, str) and len(given) != w:
            raise ValueError(f"input width mismatch on signal {sid}")
        values[sid] = v & ((1 << w) - 1)
    for g in net.gates:
        values[g.output] = _eval_gate(net, g, values)
    return [from_int(values[o], net.widths[o]) for o in net.outputs]


def _eval_gate(net: Netlist, g: Gate, values: dict[int, int]) -> int:
    ops = [values[o] for o in g.operands]
    w = [net.widths[o] for o in g.operands]
    kind = g.kind
    if kind == "CONST":
        return int(g.params[0], 2)
    if kind == "MUL":
        prod = signed_value(ops[0], w[0]) * signed_value(ops[1], w[1])
        return prod & ((1 << (2 * w[0])) - 1)
    if kind == "ADD":
        return (ops[0] + ops[1]) & ((1 << w[0]) - 1)
    if kind == "SUB":
        return (ops[0] - ops[1]) & ((1 << w[0]) - 1)
    if kind == "GT":
        return int(signed_value(ops[0], w[0]) > signed_value(ops[1], w[1]))
    if kind == "GTU":
        return int(ops[0] > ops[1])
    if kind == "MUX":
        return ops[1] if ops[0] else ops[2]
    if kind == "SHR":
        amount, arith = g.params
        if arith:
            return (signed_value(ops[0], w[0]) >> amount) & ((1 << w[0]) - 1)
        return ops[0] >> amount
    if kind == "SEXT":
        (to,) = g.params
        return signed_value(ops[0], w[0]) & ((1 << to) - 1)
    if kind == "SLICE":
        lo, hi = g.params
        return (ops[0] >> lo) & ((1 << (hi - lo + 1)) - 1)
    if kind == "CONCAT":
        acc = 0
        for v, width in zip(ops, w):  # first operand is most significant
            acc = (acc << width) | v
        return acc
    if kind == "CLIP":
        (to,) = g.params
        v = signed_value(ops[0], w[0])
        hi = (1 << (to - 1)) - 1
        lo = -(1 << (to - 1))
        v = max(lo, min(hi, v))
        return v & ((1 << to) - 1)
    if kind == "LUT":
        table, _k = g.params
        pattern = 0
        for q, v in enumerate(ops):
            pattern |= (v & 1) << q
        return (table >> pattern) & 1
    if kind == "NOT":
        return ~ops[0] & ((1 << w[0]) - 1)
    if kind == "AND":
        return ops[0] & ops[1]
    if kind == "OR":
        return ops[0] | ops[1]
    if kind == "XOR":
        return ops[0] ^ ops[1]
    raise ValueError(f"unknown gate kind {kind!r}")


def merge_into(dst: Netlist, src: Netlist, input_map: dict[int, int]) -> dict[int, int]:
    """Inline ``src`` into ``dst`` with its inputs bound per ``input_map``.

    Returns the full signal-id mapping; ``src`` is left untouched.
    """
    mapping = dict(input_map)
    for sid in src.inputs:
        if sid not in mapping:
            raise ValueError(f"unbound module input signal {sid}")
        if dst.widths[mapping[sid]] != src.widths[sid]:
            raise ValueError(f"width mismatch binding module input {sid}")
    for g in src.gates:
        if g.kind == "CONST":
            mapping[g.output] = dst.add_const(g.params[0])
        else:
            mapping[g.output] = dst.add_gate(
                g.kind, tuple(mapping[o] for o in g.operands), g.params
            )
    return mapping


def _emit_neuron(
    net: Netlist,
    input_sids: list[int],
    weights_q: list[str],
    bias_q: str | None,
    has_relu: bool,
    fmt: FixedPointFormat,
) -> int:
    m, i = fmt.total_bits, fmt.fractional_bits
    if len(weights_q) != len(input_sids):
        raise ValueError("one weight per input required")
    if not weights_q and bias_q is None:
        raise ValueError("neuron needs at least one weight")
    for wq in weights_q:
        if len(wq) != m:
            raise ValueError(f"weight width {len(wq)} does not match format width {m}")
    terms = []
    for sid, wq in zip(input_sids, weights_q):
        if net.widths[sid] != m:
            raise ValueError("neuron input width does not match the format")
        w_sid = net.add_const(wq)
        prod = net.add_gate("MUL", (w_sid, sid))
        terms.append(net.add_gate("SEXT", (prod,), (3 * m,)))
    if bias_q is not None:
        one = net.add_const(quantize(1.0, fmt))
        b_sid = net.add_const(bias_q)
        prod = net.add_gate("MUL", (b_sid, one))
        terms.append(net.add_gate("SEXT", (prod,), (3 * m,)))
    acc = terms[0]
    for t in terms[1:]:
        acc = net.add_gate("ADD", (acc, t))
    if has_relu:
        zero = net.add_const("0" * (3 * m))
        sel = net.add_gate("GT", (acc, zero))
        acc = net.add_gate("MUX", (sel, acc, zero))
    # drop the extra fractional bits; the ReLU output is non-negative, so a
    # logical shift suffices there, while the identity path needs the sign in
    shifted = net.add_gate("SHR", (acc,), (i, not has_relu))
    return net.add_gate("CLIP", (shifted,), (m,))


def build_neuron(
    weights_q: list[str],
    has_relu: bool,
    fmt: FixedPointFormat,
    bias_q: str | None = None,
    input_names: list[str] | None = None,
) -> Netlist:
    """Single-neuron module: multipliers, wide accumulator, ReLU, shift, clip."""
    net = Netlist()
    sids = [
        net.add_input(fmt.total_bits, input_names[k] if input_names else None)
        for k in range(len(weights_q))
    ]
    out = _emit_neuron(net, sids, weights_q, bias_q, has_relu, fmt)
    net.set_output(out)
    return net


def cascade_modules(
    per_node_modules: list[list[Netlist]],
    layer_sizes: list[int],
    fmt: FixedPointFormat,
    input_names: list[str] | None = None,
) -> Netlist:
    """Wire per-node modules into the full network topology plus argmax.

    Layer l's modules each consume all of layer l-1's word outputs; the final
    layer must have exactly two nodes, and a signed comparator emits the
    predicted-class bit (out1 > out0, ties toward class 0).
    """
    if len(per_node_modules) != len(layer_sizes) - 1:
        raise ValueError("one module row per non-input layer required")
    m = fmt.total_bits
    net = Netlist()
    words = [
        net.add_input(m, input_names[k] if input_names else f"x{k}")
        for k in range(layer_sizes[0])
    ]
    for l, row in enumerate(per_node_modules, start=1):
        if len(row) != layer_sizes[l]:
            raise ValueError(f"layer {l}: expected {layer_sizes[l]} modules")
        new_words = []
        for module in row:
            if len(module.inputs) != len(words):
                raise ValueError(f"layer {l}: module input count mismatch")
            if len(module.outputs) != 1 or module.widths[module.outputs[0]] != m:
                raise ValueError(f"layer {l}: module must output one {m}-bit word")
            mapping = merge_into(net, module, dict(zip(module.inputs, words)))
            new_words.append(mapping[module.outputs[0]])
        words = new_words
    if len(words) != 2:
        raise ValueError("cascade expects a 2-node final layer for the argmax bit")
    for w in words:
        net.set_output(w)
    net.set_output(net.add_gate("GT", (words[1], words[0]), name="argmax"))
    return net


def build_network_direct(net_mlp, fmt: FixedPointFormat, input_names=None) -> Netlist:
    """Direct arithmetic lowering of a trained network, one neuron at a time."""
    modules: list[list[Netlist]] = []
    for layer in net_mlp.layers:
        has_relu = layer.activation == "relu"
        row = []
        for weights, bias in zip(layer.weights, layer.bias):
            wq = [quantize(float(w), fmt) for w in weights]
            bq = quantize(float(bias), fmt)
            row.append(build_neuron(wq, has_relu, fmt, bias_q=bq))
        modules.append(row)
    return cascade_modules(modules, net_mlp.layer_sizes, fmt, input_names)


def _emit_tree(net: Netlist, feature_sids: list[int], node, width: int) -> tuple[int, int]:
    """Comparator/mux cascade for one tree; returns (p0, p1) word signals."""
    if node.feature is None:
        return (
            net.add_const(from_int(quantize_prob(node.p0), width)),
            net.add_const(from_int(quantize_prob(node.p1), width)),
        )
    zero = net.add_const("0")
    sel = net.add_gate("GTU", (feature_sids[node.feature], zero))
    l0, l1 = _emit_tree(net, feature_sids, node.left, width)
    r0, r1 = _emit_tree(net, feature_sids, node.right, width)
    return (
        net.add_gate("MUX", (sel, r0, l0)),
        net.add_gate("MUX", (sel, r1, l1)),
    )


def build_tree(tree, width: int = PROB_FRAC_BITS + 1) -> Netlist:
    """Single decision tree over 1-bit features; outputs the (p0, p1) pair.

    Each internal node is emitted as a literal unsigned comparator of its
    feature bit against zero, which the AIG folding later collapses to the
    bit itself.
    """
    net = Netlist()
    sids = [net.add_input(1, f"f{k}") for k in range(tree.n_features)]
    p0, p1 = _emit_tree(net, sids, tree.root, width)
    net.set_output(p0)
    net.set_output(p1)
    return net


def _emit_forest_bit(net: Netlist, feature_sids: list[int], model) -> int:
    width = PROB_FRAC_BITS + 1 + math.ceil(math.log2(model.n_estimators))
    sums = None
    for tree in model.trees:
        p0, p1 = _emit_tree(net, feature_sids, tree.root, width)
        if sums is None:
            sums = (p0, p1)
        else:
            sums = (
                net.add_gate("ADD", (sums[0], p0)),
                net.add_gate("ADD", (sums[1], p1)),
            )
    return net.add_gate("GTU", (sums[1], sums[0]))


def build_forest_bit(model) -> Netlist:
    """Forest vote circuit: per-tree probability pairs summed, then compared."""
    net = Netlist()
    sids = [net.add_input(1, f"f{k}") for k in range(model.n_features)]
    net.set_output(_emit_forest_bit(net, sids, model))
    return net


def _emit_lut_mux(net: Netlist, entries, select_sids: list[int]) -> int:
    if len(entries) == 1:
        return net.add_const(str(int(entries[0])))
    half = len(entries) // 2
    lo = _emit_lut_mux(net, entries[:half], select_sids[:-1])
    hi = _emit_lut_mux(net, entries[half:], select_sids[:-1])
    return net.add_gate("MUX", (select_sids[-1], hi, lo))


def build_lut(truth_entries) -> Netlist:
    """Mux tree over constant entries; select line q carries weight 2**q."""
    n = len(truth_entries)
    k = n.bit_length() - 1
    if n != 1 << k or k < 1:
        raise ValueError("truth table must have 2**k entries for k >= 1")
    net = Netlist()
    sids = [net.add_input(1, f"s{q}") for q in range(k)]
    net.set_output(_emit_lut_mux(net, list(truth_entries), sids))
    return net
