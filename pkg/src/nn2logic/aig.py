"""And-Inverter Graph with complemented edges and structural hashing.

A literal is an int ``2 * node + complement``; node 0 is constant FALSE, so
literal 0 is FALSE and literal 1 is TRUE.  AND nodes are append-only with
both fanins created earlier, which keeps every traversal a single ascending
pass.  Batch simulation packs one sample per bit of a Python int, so a full
pass evaluates every sample at once.
"""

from __future__ import annotations

from nn2logic.netlist import Netlist

CONST_FALSE = 0
CONST_TRUE = 1
_INPUT = -1
_CONST = -2


def lit(node: int, complemented: bool = False) -> int:
    return (node << 1) | int(complemented)


def lit_node(literal: int) -> int:
    return literal >> 1


def lit_comp(literal: int) -> bool:
    return bool(literal & 1)


class AigGraph:
    def __init__(self) -> None:
        self.fanin0: list[int] = [_CONST]
        self.fanin1: list[int] = [_CONST]
        self.inputs: list[int] = []  # node ids in input order
        self.outputs: list[int] = []  # literals
        self.input_names: list = []
        self.output_names: list = []
        self._strash: dict[int, int] = {}

    # -- construction ----------------------------------------------------

    def add_input(self, name=None) -> int:
        """Create a primary input; returns its (uncomplemented) literal."""
        self.fanin0.append(_INPUT)
        self.fanin1.append(_INPUT)
        self.inputs.append(len(self.fanin0) - 1)
        self.input_names.append(name)
        return (len(self.fanin0) - 1) << 1

    def add_output(self, literal: int, name=None) -> None:
        self.outputs.append(literal)
        self.output_names.append(name)

    def and2(self, a: int, b: int) -> int:
        if a == 1:
            return b
        if b == 1:
            return a
        if a == 0 or b == 0:
            return 0
        if a == b:
            return a
        if a ^ b == 1:
            return 0
        if a > b:
            a, b = b, a
        key = (a << 32) | b
        node = self._strash.get(key)
        if node is None:
            self.fanin0.append(a)
            self.fanin1.append(b)
            node = len(self.fanin0) - 1
            self._strash[key] = node
        return node << 1

    def not_(self, a: int) -> int:
        return a ^ 1

    def or2(self, a: int, b: int) -> int:
        return self.and2(a ^ 1, b ^ 1) ^ 1

    def xor2(self, a: int, b: int) -> int:
        return self.or2(self.and2(a, b ^ 1), self.and2(a ^ 1, b))

    def mux(self, sel: int, a: int, b: int) -> int:
        """``a`` when sel is 1, else ``b``."""
        return self.or2(self.and2(sel, a), self.and2(sel ^ 1, b))

    # -- queries ----------------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self.fanin0)

    def is_and(self, node: int) -> bool:
        return self.fanin0[node] >= 0

    def and_count(self) -> int:
        return sum(1 for f in self.fanin0 if f >= 0)


def simulate_batch(g: AigGraph, input_words: list[int], n_lanes: int) -> list[int]:
    """Evaluate all lanes at once; lane s of word k is sample s's bit for input k."""
    if len(input_words) != len(g.inputs):
        raise ValueError(f"expected {len(g.inputs)} input words, got {len(input_words)}")
    mask = (1 << n_lanes) - 1
    f0, f1 = g.fanin0, g.fanin1
    values = [0] * len(f0)
    for node, word in zip(g.inputs, input_words):
        values[node] = word & mask
    for node in range(1, len(f0)):
        a = f0[node]
        if a < 0:
            continue
        b = f1[node]
        va = values[a >> 1]
        if a & 1:
            va ^= mask
        vb = values[b >> 1]
        if b & 1:
            vb ^= mask
        values[node] = va & vb
    outs = []
    for o in g.outputs:
        v = values[o >> 1]
        outs.append((v ^ mask) if o & 1 else v)
    return outs


def simulate_aig(g: AigGraph, input_bits) -> list[int]:
    """Single-vector simulation; returns one bit per output."""
    words = [int(b) & 1 for b in input_bits]
    return [v & 1 for v in simulate_batch(g, words, 1)]


def stats(g: AigGraph) -> tuple[int, int]:
    """(AND-node count, longest input-to-output path in AND nodes)."""
    f0, f1 = g.fanin0, g.fanin1
    level = [0] * len(f0)
    count = 0
    for node in range(1, len(f0)):
        a = f0[node]
        if a < 0:
            continue
        count += 1
        la = level[a >> 1]
        lb = level[f1[node] >> 1]
        level[node] = (la if la >= lb else lb) + 1
    depth = 0
    for o in g.outputs:
        if level[o >> 1] > depth:
            depth = level[o >> 1]
    return count, depth


def sweep(g: AigGraph) -> AigGraph:
    """Drop AND nodes unreachable from the outputs and re-hash the rest.

    Primary inputs are all kept so input counts and positions are stable.
    """
    live = bytearray(len(g.fanin0))
    stack = [o >> 1 for o in g.outputs]
    f0, f1 = g.fanin0, g.fanin1
    while stack:
        node = stack.pop()
        if live[node]:
            continue
        live[node] = 1
        if f0[node] >= 0:
            stack.append(f0[node] >> 1)
            stack.append(f1[node] >> 1)
    out = AigGraph()
    remap = [0] * len(f0)
    for node, name in zip(g.inputs, g.input_names):
        remap[node] = out.add_input(name)
    for node in range(1, len(f0)):
        if f0[node] < 0 or not live[node]:
            continue
        a, b = f0[node], f1[node]
        remap[node] = out.and2(remap[a >> 1] ^ (a & 1), remap[b >> 1] ^ (b & 1))
    for o, name in zip(g.outputs, g.output_names):
        out.add_output(remap[o >> 1] ^ (o & 1), name)
    return out


def import_graph(dst: AigGraph, src: AigGraph, input_lits: list[int]) -> list[int]:
    """Copy ``src`` into ``dst`` with its inputs bound; returns output literals."""
    if len(input_lits) != len(src.inputs):
        raise ValueError("input binding count mismatch")
    remap = [0] * len(src.fanin0)
    for node, bound in zip(src.inputs, input_lits):
        remap[node] = bound
    f0, f1 = src.fanin0, src.fanin1
    for node in range(1, len(f0)):
        a = f0[node]
        if a < 0:
            continue
        b = f1[node]
        remap[node] = dst.and2(remap[a >> 1] ^ (a & 1), remap[b >> 1] ^ (b & 1))
    return [remap[o >> 1] ^ (o & 1) for o in src.outputs]


# -- word-level lowering ---------------------------------------------------


def _ripple_add(g: AigGraph, a: list[int], b: list[int], carry: int = 0) -> list[int]:
    out = []
    for x, y in zip(a, b):
        xy = g.xor2(x, y)
        out.append(g.xor2(xy, carry))
        carry = g.or2(g.and2(x, y), g.and2(carry, xy))
    return out


def _is_positive(g: AigGraph, a: list[int], b: list[int], signed: bool) -> int:
    """1 iff a > b, via an extended subtraction: sign clear and result nonzero."""
    ext = (a[-1] if signed else 0, b[-1] if signed else 0)
    aa = a + [ext[0]]
    bb = [x ^ 1 for x in b] + [ext[1] ^ 1]
    diff = _ripple_add(g, aa, bb, 1)
    nonzero = 0
    for bit in diff:
        nonzero = g.or2(nonzero, bit)
    return g.and2(diff[-1] ^ 1, nonzero)


def _multiply(g: AigGraph, a: list[int], b: list[int]) -> list[int]:
    """Shift-and-add product of sign-extended operands, truncated to 2w."""
    w2 = 2 * len(a)
    aa = a + [a[-1]] * (w2 - len(a))
    bb = b + [b[-1]] * (w2 - len(b))
    acc = [0] * w2
    for j, bj in enumerate(bb):
        partial = [g.and2(bj, aa[k]) for k in range(w2 - j)]
        acc[j:] = _ripple_add(g, acc[j:], partial)
    return acc


def _lut_cofactor(g: AigGraph, table: int, sels: list[int], memo: dict) -> int:
    k = len(sels)
    if k == 0:
        return table & 1
    full = (1 << (1 << k)) - 1
    if table == 0:
        return 0
    if table == full:
        return 1
    key = (k, table)
    cached = memo.get(key)
    if cached is not None:
        return cached
    half = 1 << (k - 1)
    lo = table & ((1 << half) - 1)
    hi = table >> half
    if lo == hi:
        res = _lut_cofactor(g, lo, sels[:-1], memo)
    else:
        f0 = _lut_cofactor(g, lo, sels[:-1], memo)
        f1 = _lut_cofactor(g, hi, sels[:-1], memo)
        res = g.mux(sels[-1], f1, f0)
    memo[key] = res
    return res


def lower_netlist(net: Netlist, graph: AigGraph | None = None) -> AigGraph:
    """Bit-blast a word-level netlist into AND/NOT structure.

    Output literals correspond positionally to the netlist outputs, each word
    expanded least significant bit first.  When ``graph`` is supplied the
    netlist is lowered into it, reusing its existing primary inputs in order;
    lowering the same netlist twice therefore adds no new nodes.
    """
    g = graph if graph is not None else AigGraph()
    bits: dict[int, list[int]] = {}
    existing = list(g.inputs)
    taken = 0
    for sid in net.inputs:
        w = net.widths[sid]
        name = net.names[sid] or f"x{sid}"
        word = []
        for j in range(w):
            if taken < len(existing):
                word.append(existing[taken] << 1)
                taken += 1
            else:
                word.append(g.add_input(f"{name}[{j}]"))
        bits[sid] = word
    if graph is not None and taken != len(existing):
        raise ValueError("existing graph inputs do not match the netlist inputs")

    for gate in net.gates:
        ops = [bits[o] for o in gate.operands]
        kind = gate.kind
        if kind == "CONST":
            word = [int(c) for c in reversed(gate.params[0])]
        elif kind == "MUL":
            word = _multiply(g, ops[0], ops[1])
        elif kind == "ADD":
            word = _ripple_add(g, ops[0], ops[1])
        elif kind == "SUB":
            word = _ripple_add(g, ops[0], [x ^ 1 for x in ops[1]], 1)
        elif kind == "GT":
            word = [_is_positive(g, ops[0], ops[1], signed=True)]
        elif kind == "GTU":
            word = [_is_positive(g, ops[0], ops[1], signed=False)]
        elif kind == "MUX":
            sel = ops[0][0]
            word = [g.mux(sel, x, y) for x, y in zip(ops[1], ops[2])]
        elif kind == "SHR":
            amount, arith = gate.params
            w = len(ops[0])
            fill = ops[0][-1] if arith else 0
            word = [ops[0][j + amount] if j + amount < w else fill for j in range(w)]
        elif kind == "SEXT":
            (to,) = gate.params
            word = ops[0] + [ops[0][-1]] * (to - len(ops[0]))
        elif kind == "SLICE":
            lo, hi = gate.params
            word = ops[0][lo : hi + 1]
        elif kind == "CONCAT":
            word = []
            for op in reversed(ops):  # last operand holds the low bits
                word.extend(op)
        elif kind == "CLIP":
            (to,) = gate.params
            src = ops[0]
            sign = src[-1]
            fits = 1
            for j in range(to - 1, len(src) - 1):
                fits = g.and2(fits, g.xor2(src[j], sign) ^ 1)
            word = [g.mux(fits, src[j], sign if j == to - 1 else sign ^ 1) for j in range(to)]
        elif kind == "LUT":
            table, _k = gate.params
            word = [_lut_cofactor(g, table, [op[0] for op in ops], {})]
        elif kind == "NOT":
            word = [x ^ 1 for x in ops[0]]
        elif kind == "AND":
            word = [g.and2(x, y) for x, y in zip(ops[0], ops[1])]
        elif kind == "OR":
            word = [g.or2(x, y) for x, y in zip(ops[0], ops[1])]
        elif kind == "XOR":
            word = [g.xor2(x, y) for x, y in zip(ops[0], ops[1])]
        else:
            raise ValueError(f"cannot lower gate kind {kind!r}")
        bits[gate.output] = word

    for sid in net.outputs:
        name = net.names[sid] or f"y{sid}"
        word = bits[sid]
        for j, literal in enumerate(word):
            g.add_output(literal, f"{name}[{j}]" if len(word) > 1 else name)
    return g


# -- AIGER I/O --------------------------------------------------------------


def write_aiger(g: AigGraph, path) -> None:
    """ASCII AIGER (`aag M I L O A`, combinational: L = 0)."""
    order: list[int] = list(g.inputs)
    f0, f1 = g.fanin0, g.fanin1
    ands = [n for n in range(1, len(f0)) if f0[n] >= 0]
    new_index = [0] * len(f0)
    for pos, node in enumerate(order + ands, start=1):
        new_index[node] = pos

    def ren(literal: int) -> int:
        return (new_index[literal >> 1] << 1) | (literal & 1)

    lines = [f"aag {len(order) + len(ands)} {len(order)} 0 {len(g.outputs)} {len(ands)}"]
    for node in order:
        lines.append(str(new_index[node] << 1))
    for o in g.outputs:
        lines.append(str(ren(o)))
    for node in ands:
        lines.append(f"{new_index[node] << 1} {ren(f0[node])} {ren(f1[node])}")
    for pos, name in enumerate(g.input_names):
        if name:
            lines.append(f"i{pos} {name}")
    for pos, name in enumerate(g.output_names):
        if name:
            lines.append(f"o{pos} {name}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_aiger(path) -> AigGraph:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("aag "):
        raise ValueError(f"{path}: not an ASCII AIGER file")
    fields = lines[0].split()
    if len(fields) != 6:
        raise ValueError(f"{path}: malformed header")
    _m, n_in, n_latch, n_out, n_and = (int(v) for v in fields[1:])
    if n_latch:
        raise ValueError(f"{path}: latches are not supported")
    g = AigGraph()
    pos = 1
    var_lit: dict[int, int] = {0: 0}
    for _ in range(n_in):
        declared = int(lines[pos])
        pos += 1
        if declared & 1 or declared == 0:
            raise ValueError(f"{path}: invalid input literal {declared}")
        var_lit[declared >> 1] = g.add_input()
    out_specs = []
    for _ in range(n_out):
        out_specs.append(int(lines[pos]))
        pos += 1
    defs: dict[int, tuple[int, int]] = {}
    for _ in range(n_and):
        lhs, rhs0, rhs1 = (int(v) for v in lines[pos].split())
        pos += 1
        if lhs & 1:
            raise ValueError(f"{path}: AND literal {lhs} must be even")
        defs[lhs >> 1] = (rhs0, rhs1)

    def resolve(literal: int) -> int:
        todo = [literal >> 1]
        while todo:
            var = todo[-1]
            if var in var_lit:
                todo.pop()
                continue
            if var not in defs:
                raise ValueError(f"{path}: undefined variable {var}")
            r0, r1 = defs[var]
            missing = [x >> 1 for x in (r0, r1) if (x >> 1) not in var_lit]
            if missing:
                todo.extend(missing)
                continue
            a = var_lit[r0 >> 1] ^ (r0 & 1)
            b = var_lit[r1 >> 1] ^ (r1 & 1)
            var_lit[var] = g.and2(a, b)
            todo.pop()
        return var_lit[literal >> 1] ^ (literal & 1)

    for var in sorted(defs):
        resolve(var << 1)
    for spec in out_specs:
        g.add_output(resolve(spec))
    for line in lines[pos:]:
        if line == "c":
            break
        if line.startswith("i") or line.startswith("o"):
            tag, _, name = line.partition(" ")
            idx = int(tag[1:])
            if tag[0] == "i" and idx < len(g.input_names):
                g.input_names[idx] = name
            elif tag[0] == "o" and idx < len(g.output_names):
                g.output_names[idx] = name
    return g
