"""Program loading, the run loop, halt conventions and statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, TextIO

from . import golden
from .golden import ArchState, MAX_STEPS
from .image import EmptyImage, MalformedHex, ProgramImage, load_image  # noqa: F401
from .microarch import CLASS_OF, CoreConfig, MicroCore

DEFAULT_BASE = 0x1000
DEFAULT_MEM_SIZE = 64 * 1024
DEFAULT_MAX_CYCLES = 10_000_000


@dataclass
class ExecStats:
    cycles: int = 0
    instret: int = 0
    halt: Optional[str] = None
    exit_code: Optional[int] = None
    code_size: int = 0
    startup_cycles: int = 0
    width: int = 32
    extensions: tuple = ()
    classes: dict = field(default_factory=dict)  # class -> [count, cycles]
    console: bytes = b""

    @property
    def cpi(self) -> float:
        return self.cycles / self.instret if self.instret else 0.0

    def to_json_dict(self) -> dict:
        return {
            "cycles": self.cycles,
            "instret": self.instret,
            "cpi": round(self.cpi, 4),
            "halt": self.halt,
            "code_size": self.code_size,
            "width": self.width,
            "extensions": sorted(self.extensions),
            "classes": {k: {"count": v[0], "cycles": v[1]}
                        for k, v in sorted(self.classes.items())},
        }


def run(image: ProgramImage, config: CoreConfig,
        max_cycles: int = DEFAULT_MAX_CYCLES,
        trace: Optional[TextIO] = None,
        mem_size: int = DEFAULT_MEM_SIZE,
        state: Optional[ArchState] = None) -> ExecStats:
    """Execute an image on the cycle-accurate core until it halts.

    Halting: ebreak, plain ecall, any trap, a store to the exit MMIO word,
    or exhausting the cycle budget. An instruction that would overrun the
    budget does not retire. Pass a pre-built `state` to inspect memory
    after the run.
    """
    if max_cycles <= 0:
        raise ValueError("max_cycles must be > 0")
    if state is None:
        state = ArchState.from_image(image, mem_size=mem_size)
    core = MicroCore(config, state)
    stats = ExecStats(code_size=image.code_size, width=config.serial_width,
                      extensions=tuple(e.value for e in config.extensions))
    classes = stats.classes

    while True:
        before = core.cycle
        pc_before = state.pc
        cycles, outcome, ins = core.step()
        if core.cycle > max_cycles:
            # roll back the straddling instruction's charge; it did not retire
            core.cycle = before
            stats.halt = MAX_STEPS
            break
        if ins is not None and (not outcome.halted or
                                outcome.reason in (golden.EBREAK, golden.ECALL)):
            stats.instret += 1
            entry = classes.setdefault(CLASS_OF[ins.mnemonic], [0, 0])
            entry[0] += 1
            entry[1] += cycles
            if trace is not None:
                trace.write(f"{core.cycle - cycles},0x{pc_before:08x},"
                            f"0x{ins.raw:08x},{ins.mnemonic.value},{cycles}\n")
        if outcome.halted:
            stats.halt = outcome.reason
            break
        if state.mem.exit_code is not None:
            stats.halt = golden.ECALL
            stats.exit_code = state.mem.exit_code
            break

    stats.cycles = core.cycle
    stats.startup_cycles = min(core.startup_cycles, core.cycle)
    stats.console = bytes(state.mem.console)
    if stats.halt == golden.ECALL and stats.exit_code is None:
        stats.exit_code = 0
    return stats


def run_golden(image: ProgramImage, extensions: Optional[frozenset] = None,
               max_steps: int = 1_000_000,
               mem_size: int = DEFAULT_MEM_SIZE) -> tuple:
    """Run the untimed reference model to completion.

    Returns (final ArchState, instret, halt reason).
    """
    state = ArchState.from_image(image, mem_size=mem_size)
    instret = 0
    for _ in range(max_steps):
        outcome = golden.step(state, extensions)
        if outcome.halted:
            if outcome.reason in (golden.EBREAK, golden.ECALL):
                instret += 1
            return state, instret, outcome.reason
        instret += 1
        if state.mem.exit_code is not None:
            return state, instret, golden.ECALL
    return state, instret, MAX_STEPS


def stats_to_json(stats: ExecStats) -> str:
    return json.dumps(stats.to_json_dict(), indent=2, sort_keys=True)
