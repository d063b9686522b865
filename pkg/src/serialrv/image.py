"""Loadable program images: flat binaries and hex-word listings."""

from __future__ import annotations

import os
from typing import NamedTuple, Optional, Union


class MalformedHex(Exception):
    def __init__(self, line_no: int, text: str):
        self.line_no = line_no
        self.text = text

    def __str__(self) -> str:
        return f"line {self.line_no}: not an 8-digit hex word: {self.text!r}"


class EmptyImage(Exception):
    pass


class ProgramImage(NamedTuple):
    """Code+data bytes with a load address and entry point."""

    base: int
    data: bytes
    entry: int
    code_size: int

    def validate(self) -> "ProgramImage":
        if self.base % 4 != 0:
            raise ValueError(f"base 0x{self.base:x} not word-aligned")
        if not self.data:
            if self.entry != self.base:
                raise ValueError("empty image must have entry == base")
        elif not self.base <= self.entry < self.base + len(self.data):
            raise ValueError(f"entry 0x{self.entry:x} outside image")
        return self


def load_image(source: Union[str, os.PathLike, bytes], fmt: str = "flat-bin",
               base: int = 0x1000, entry: Optional[int] = None) -> ProgramImage:
    """Build a ProgramImage from a file path or raw bytes.

    flat-bin: the bytes are the image.
    hex-words: one 8-hex-digit word per line, stored little-endian;
    blank lines and `#` comments allowed.
    """
    if isinstance(source, bytes):
        raw = source
    else:
        with open(source, "rb") as fh:
            raw = fh.read()

    if fmt == "flat-bin":
        data = raw
    elif fmt == "hex-words":
        words = []
        for line_no, line in enumerate(raw.decode("ascii", "replace").splitlines(), 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if len(text) != 8 or any(c not in "0123456789abcdefABCDEF" for c in text):
                raise MalformedHex(line_no, text)
            words.append(int(text, 16))
        data = b"".join(w.to_bytes(4, "little") for w in words)
    else:
        raise ValueError(f"unknown image format {fmt!r}")

    if not data:
        raise EmptyImage("image has no bytes")
    return ProgramImage(base=base, data=data,
                        entry=base if entry is None else entry,
                        code_size=len(data)).validate()
