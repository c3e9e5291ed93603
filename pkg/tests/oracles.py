"""Independent reference implementations the test suite checks against.

Everything in here is deliberately written straight-line and separate from
the package internals so that it can serve as an oracle.
"""

from __future__ import annotations


def quantize_reference(x: float, m: int, i: int) -> str:
    """Straight-line reference for the quantization scheme."""
    x_int = int((1 << i) * x)
    largest_signed_int = (1 << (m - 1)) - 1
    x_int = min(largest_signed_int, x_int)
    smallest_signed_int = -(1 << (m - 1))
    x_int = max(smallest_signed_int, x_int)
    largest_unsigned_int = (1 << m) - 1
    x_int = x_int & largest_unsigned_int
    return format(x_int, "b").zfill(m)


def signed(word: int, width: int) -> int:
    if word & (1 << (width - 1)):
        word -= 1 << width
    return word


def neuron_reference(weights: list[int], x: list[int], bias: int | None,
                     has_relu: bool, m: int, i: int) -> int:
    """Integer semantics of the single-neuron arithmetic circuit.

    ``weights``/``x``/``bias`` are signed m-bit integers.  Products are exact
    (they fit in 2m bits), accumulation wraps at 3m bits, the ReLU is a
    compare-against-zero driving a mux, the shift drops the extra i
    fractional bits, and the final clip saturates to the m-bit signed range.
    Returns the m-bit output as an unsigned word.
    """
    acc = 0
    for w, v in zip(weights, x):
        acc += w * v
    if bias is not None:
        one = min((1 << (m - 1)) - 1, 1 << i)
        acc += bias * one
    acc &= (1 << (3 * m)) - 1
    acc = signed(acc, 3 * m)
    if has_relu and acc <= 0:
        acc = 0
    v = acc >> i  # arithmetic shift: floor division by 2**i
    hi = (1 << (m - 1)) - 1
    lo = -(1 << (m - 1))
    v = max(lo, min(hi, v))
    return v & ((1 << m) - 1)
