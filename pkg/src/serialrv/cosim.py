"""Randomized torture tests and lockstep comparison against the golden model.

Generated programs are forward-branch-only (guaranteed termination): every
branch targets a point 1..3 instructions ahead, so the instructions in its
shadow execute only when it falls through. Memory traffic is confined to a
scratch window addressed off a reserved base register.
"""

from __future__ import annotations

import random
from typing import NamedTuple, Optional, Tuple

from . import golden, isa, system
from .golden import ArchState
from .image import ProgramImage
from .isa import Assembler, Ext, Mnemonic as M
from .microarch import CoreConfig, MicroCore

SCRATCH_REG = 3  # holds the scratch window base for all loads/stores

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


class TortureConfig(NamedTuple):
    seed: int
    length: int = 200
    extensions: frozenset = isa.ZKN
    memory_window: Tuple[int, int] = (0x2000, 0x200)  # (base, size)
    branch_density: float = 0.1


class Divergence(Exception):
    def __init__(self, pc: int, field: str, detail: str = ""):
        self.pc = pc
        self.field = field
        self.detail = detail

    def __str__(self) -> str:
        return f"divergence at pc=0x{self.pc:08x} in {self.field} {self.detail}"


class CosimReport(NamedTuple):
    seed: int
    width: int
    extensions: tuple
    passed: bool
    sig_micro: str
    sig_golden: str
    divergence_pc: Optional[int] = None
    divergence_field: Optional[str] = None
    instret: int = 0

    def to_json_dict(self) -> dict:
        d = {
            "seed": self.seed,
            "width": self.width,
            "extensions": sorted(self.extensions),
            "pass": self.passed,
            "sig_micro": self.sig_micro,
            "sig_golden": self.sig_golden,
        }
        if self.divergence_pc is not None:
            d["divergence_pc"] = f"0x{self.divergence_pc:08x}"
            d["divergence_field"] = self.divergence_field
        return d


def fnv1a64(data: bytes, h: int = FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def signature(state: ArchState, window: Tuple[int, int]) -> str:
    """FNV-1a-64 over x1..x31 (little-endian words) then the window bytes."""
    h = fnv1a64(b"".join(r.to_bytes(4, "little") for r in state.regs[1:]))
    base, size = window
    h = fnv1a64(state.mem.read_bytes(base, size), h)
    return f"{h:016x}"


# mnemonic pools the generator draws from, keyed by extension
_ALU_R = (M.ADD, M.SUB, M.SLL, M.SLT, M.SLTU, M.XOR, M.SRL, M.SRA, M.OR, M.AND)
_ALU_I = (M.ADDI, M.SLTI, M.SLTIU, M.XORI, M.ORI, M.ANDI)
_SHIFT_I = (M.SLLI, M.SRLI, M.SRAI)
_LOADS = (M.LB, M.LH, M.LW, M.LBU, M.LHU)
_STORES = (M.SB, M.SH, M.SW)
_BRANCHES = (M.BEQ, M.BNE, M.BLT, M.BGE, M.BLTU, M.BGEU)

_POOL_BY_EXT = {
    Ext.ZBKB: (M.ROR, M.ROL, M.RORI, M.ANDN, M.ORN, M.XNOR, M.PACK, M.PACKH,
               M.BREV8, M.REV8, M.ZIP, M.UNZIP),
    Ext.ZBKC: (M.CLMUL, M.CLMULH),
    Ext.ZBKX: (M.XPERM4, M.XPERM8),
    Ext.ZKNE: (M.AES32ESI, M.AES32ESMI),
    Ext.ZKND: (M.AES32DSI, M.AES32DSMI),
    Ext.ZKNH: (M.SHA256SIG0, M.SHA256SIG1, M.SHA256SUM0, M.SHA256SUM1,
               M.SHA512SIG0H, M.SHA512SIG0L, M.SHA512SIG1H, M.SHA512SIG1L,
               M.SHA512SUM0R, M.SHA512SUM1R),
}


def _build_pool(extensions: frozenset) -> tuple:
    pool = list(_ALU_R + _ALU_I + _SHIFT_I + _LOADS + _STORES
                + (M.LUI, M.AUIPC, M.FENCE))
    for ext, mnems in _POOL_BY_EXT.items():
        if ext in extensions:
            pool.extend(mnems)
    return tuple(pool)


def _random_non_branch(a: Assembler, rng: random.Random, pool: tuple,
                       wbase: int, wsize: int) -> None:
    m = rng.choice(pool)
    rd = rng.choice([r for r in range(32) if r != SCRATCH_REG])
    rs1 = rng.randrange(32)
    rs2 = rng.randrange(32)
    if m in _ALU_I:
        a.emit(m, rd=rd, rs1=rs1, imm=rng.randrange(-2048, 2048))
    elif m in _SHIFT_I or m is M.RORI:
        a.emit(m, rd=rd, rs1=rs1, imm=rng.randrange(32))
    elif m in _LOADS:
        width = {M.LB: 1, M.LBU: 1, M.LH: 2, M.LHU: 2, M.LW: 4}[m]
        off = rng.randrange(0, wsize - 4) & ~(width - 1)
        a.emit(m, rd=rd, rs1=SCRATCH_REG, imm=off)
    elif m in _STORES:
        width = {M.SB: 1, M.SH: 2, M.SW: 4}[m]
        off = rng.randrange(0, wsize - 4) & ~(width - 1)
        a.emit(m, rs1=SCRATCH_REG, rs2=rs2, imm=off)
    elif m is M.LUI or m is M.AUIPC:
        a.emit(m, rd=rd, imm=rng.randrange(1 << 20))
    elif m is M.FENCE:
        a.emit(m)
    elif m in isa.AES_MNEMONICS:
        a.emit(m, rd=rd, rs1=rs1, rs2=rs2, bs=rng.randrange(4))
    elif isa.ENCODINGS[m].fmt == isa.FMT_UNARY:
        a.emit(m, rd=rd, rs1=rs1)
    else:
        a.emit(m, rd=rd, rs1=rs1, rs2=rs2)


def generate(config: TortureConfig) -> ProgramImage:
    """Emit a legal, self-terminating random program ending in a register
    dump to the scratch window followed by ebreak."""
    rng = random.Random(config.seed)
    wbase, wsize = config.memory_window
    pool = _build_pool(config.extensions)
    a = Assembler(base=system.DEFAULT_BASE)

    # prologue: scratch base plus pseudo-random values in every register
    a.li(SCRATCH_REG, wbase)
    for r in range(1, 32):
        if r != SCRATCH_REG:
            a.li(r, rng.getrandbits(32) | 0x800)  # avoid the 1-word li form

    executed = 0
    while executed < config.length:
        if rng.random() < config.branch_density:
            shadow = rng.randrange(1, 4)
            if rng.random() < 0.15:
                rd = rng.choice([r for r in range(32) if r != SCRATCH_REG])
                a.emit(M.JAL, rd=rd, imm=4 * (shadow + 1))
            else:
                a.emit(rng.choice(_BRANCHES), rs1=rng.randrange(32),
                       rs2=rng.randrange(32), imm=4 * (shadow + 1))
            for _ in range(shadow):
                _random_non_branch(a, rng, pool, wbase, wsize)
        else:
            _random_non_branch(a, rng, pool, wbase, wsize)
        executed += 1

    # epilogue: dump x1..x31 into the window tail, then halt
    dump_base = wsize - 31 * 4
    for r in range(1, 32):
        a.emit(M.SW, rs1=SCRATCH_REG, rs2=r, imm=dump_base + 4 * (r - 1))
    a.emit(M.EBREAK)

    # pad up to the scratch window and pre-seed it so loads see a
    # deterministic pattern even before the first store
    gap = wbase - a.here
    assert gap >= 0, "program overran the scratch window"
    for _ in range(gap // 4):
        a.word(0)
    seed_bytes = bytes(rng.getrandbits(8) for _ in range(wsize))
    a.data(seed_bytes)
    return a.build()


def cosim_run(torture: TortureConfig, core: CoreConfig,
              max_steps: int = 200_000) -> CosimReport:
    """Run one generated program on both models in lockstep.

    Architectural state is compared after every retired instruction;
    final-state signatures are compared at the end.
    """
    img = generate(torture)
    gold = ArchState.from_image(img)
    micro = MicroCore(core, ArchState.from_image(img))
    exts = frozenset(core.extensions) - {Ext.ZKT}

    divergence: Optional[Tuple[int, str]] = None
    instret = 0
    for _ in range(max_steps):
        pc = gold.pc
        g_out = golden.step(gold, exts)
        _, m_out, _ = micro.step()
        march = micro.arch
        if march.pc != gold.pc:
            divergence = (pc, "pc")
            break
        if march.regs != gold.regs:
            for i in range(32):
                if march.regs[i] != gold.regs[i]:
                    divergence = (pc, f"x{i}")
                    break
            break
        if g_out.halted or m_out.halted:
            if g_out != m_out:
                divergence = (pc, "halt-reason")
            break
        instret += 1
    else:
        divergence = (gold.pc, "no-halt")

    sig_g = signature(gold, torture.memory_window)
    sig_m = signature(micro.arch, torture.memory_window)
    passed = divergence is None and sig_g == sig_m
    return CosimReport(
        seed=torture.seed, width=core.serial_width,
        extensions=tuple(e.value for e in core.extensions),
        passed=passed, sig_micro=sig_m, sig_golden=sig_g,
        divergence_pc=divergence[0] if divergence else None,
        divergence_field=divergence[1] if divergence else None,
        instret=instret)


def run_matrix(seeds, widths, extensions: frozenset = isa.ZKN_ZKT,
               length: int = 200) -> list:
    """The verification sweep: every seed crossed with every width."""
    reports = []
    for seed in seeds:
        tc = TortureConfig(seed=seed, length=length,
                           extensions=frozenset(extensions) - {Ext.ZKT})
        for w in widths:
            cc = CoreConfig(serial_width=w, extensions=extensions)
            reports.append(cosim_run(tc, cc))
    return reports
