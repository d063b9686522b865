"""Independent reference implementations used as test oracles.

Nothing in here may import the simulator's semantic code paths; values
come from the `cryptography` package, hashlib, or first-principles
reimplementations.
"""

import hashlib

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF


def aes128_encrypt_block(key: bytes, pt: bytes) -> bytes:
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(pt) + enc.finalize()


def aes128_decrypt_block(key: bytes, ct: bytes) -> bytes:
    dec = Cipher(algorithms.AES(key), modes.ECB()).decryptor()
    return dec.update(ct) + dec.finalize()


def sha256(msg: bytes) -> bytes:
    return hashlib.sha256(msg).digest()


def aes_sbox_algebraic(x: int) -> int:
    """S-box from first principles: GF(2^8) inverse + affine transform."""
    def gmul(a, b):
        p = 0
        for _ in range(8):
            if b & 1:
                p ^= a
            hi = a & 0x80
            a = (a << 1) & 0xFF
            if hi:
                a ^= 0x1B
            b >>= 1
        return p

    inv = 0
    if x:
        for y in range(1, 256):
            if gmul(x, y) == 1:
                inv = y
                break
    rot = lambda b, n: ((b << n) | (b >> (8 - n))) & 0xFF
    return inv ^ rot(inv, 1) ^ rot(inv, 2) ^ rot(inv, 3) ^ rot(inv, 4) ^ 0x63


def clmul64_convolution(a: int, b: int) -> int:
    """Carry-less product via bitwise convolution (not shift-accumulate)."""
    out = 0
    for k in range(63):
        bit = 0
        lo = max(0, k - 31)
        for i in range(lo, min(k, 31) + 1):
            bit ^= ((a >> i) & 1) & ((b >> (k - i)) & 1)
        out |= bit << k
    return out


def clmul64_shift_xor(a: int, b: int) -> int:
    """The brute-force 64-bit shift-XOR formulation."""
    p = 0
    for i in range(32):
        if (b >> i) & 1:
            p ^= a << i
    return p & MASK64


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def ror64(x: int, n: int) -> int:
    n %= 64
    return ((x >> n) | (x << (64 - n))) & MASK64 if n else x


def sha512_sigma0(x: int) -> int:
    return ror64(x, 1) ^ ror64(x, 8) ^ (x >> 7)


def sha512_sigma1(x: int) -> int:
    return ror64(x, 19) ^ ror64(x, 61) ^ (x >> 6)


def sha512_sum0(x: int) -> int:
    return ror64(x, 28) ^ ror64(x, 34) ^ ror64(x, 39)


def sha512_sum1(x: int) -> int:
    return ror64(x, 14) ^ ror64(x, 18) ^ ror64(x, 41)


# lowRISC OpenTitan's PRINCE reference table
PRINCE_SBOX4 = (0xB, 0xF, 0x3, 0x2, 0xA, 0xC, 0x9, 0x1,
                0x6, 0x7, 0x8, 0x0, 0xE, 0x5, 0xD, 0x4)
