import numpy as np


def n_words(n_bits: int) -> int:
    return (n_bits + 63) // 64


def pack_bits(bits) -> np.ndarray:
    """Pack a 0/1 vector (or an ``(n, k)`` matrix row-wise) into uint64 words.

    Bit ``j`` lands in word ``j // 64`` at position ``j % 64``.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    squeeze = bits.ndim == 1
    bits = np.atleast_2d(bits)
    n, k = bits.shape
    packed = np.zeros((n, n_words(k) * 8), dtype=np.uint8)
    packed[:, :(k + 7) // 8] = np.packbits(bits, axis=1, bitorder="little")
    words = packed.view("<u8").astype(np.uint64)
    return words[0] if squeeze else words


def unpack_bits(words, n_bits: int) -> np.ndarray:
    words = np.asarray(words, dtype=np.uint64)
    squeeze = words.ndim == 1
    words = np.atleast_2d(words)
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder="little")[:, :n_bits]
    return bits[0] if squeeze else bits
