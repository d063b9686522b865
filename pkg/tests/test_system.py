import io
import json

import pytest

from serialrv import golden, system
from serialrv.image import EmptyImage, MalformedHex, load_image
from serialrv.isa import Assembler, Mnemonic as M, instr
from serialrv.microarch import CoreConfig


def simple_image(*instrs, base=0x1000):
    a = Assembler(base=base)
    for i in instrs:
        a.put(i)
    return a.build()


# --- load_image ---------------------------------------------------------------

def test_flat_bin_bytes():
    img = load_image(b"\x13\x00\x00\x00", base=0x1000)
    assert img.base == 0x1000 and img.entry == 0x1000
    assert len(img.data) == 4 and img.code_size == 4


def test_flat_bin_file(tmp_path):
    p = tmp_path / "prog.bin"
    p.write_bytes(b"\x73\x00\x10\x00")
    img = load_image(str(p))
    assert int.from_bytes(img.data, "little") == 0x00100073


def test_hex_words():
    img = load_image(b"# boot\n00000013\n00100073\n", fmt="hex-words")
    assert len(img.data) == 8
    assert int.from_bytes(img.data[0:4], "little") == 0x00000013


def test_hex_words_malformed():
    with pytest.raises(MalformedHex) as exc:
        load_image(b"00000013\nxyz\n", fmt="hex-words")
    assert exc.value.line_no == 2


def test_empty_image_error():
    with pytest.raises(EmptyImage):
        load_image(b"", fmt="flat-bin")
    with pytest.raises(EmptyImage):
        load_image(b"# only comments\n", fmt="hex-words")


def test_unaligned_base_rejected():
    with pytest.raises(ValueError):
        load_image(b"\x13\x00\x00\x00", base=0x1002)


# --- run loop -------------------------------------------------------------------

def test_single_ebreak():
    stats = system.run(simple_image(instr(M.EBREAK)), CoreConfig(serial_width=8))
    assert stats.instret == 1 and stats.halt == golden.EBREAK


def test_infinite_loop_max_cycles():
    a = Assembler(base=0x1000)
    a.label("spin")
    a.j("spin")
    stats = system.run(a.build(), CoreConfig(serial_width=8), max_cycles=100)
    assert stats.halt == golden.MAX_STEPS
    assert stats.cycles <= 100


def test_histogram_sum_invariant():
    a = Assembler(base=0x1000)
    a.li(1, 0x123456)
    a.emit(M.SLLI, rd=2, rs1=1, imm=7)
    a.emit(M.SW, rs1=0, rs2=2, imm=0x400)
    a.emit(M.BEQ, rs1=0, rs2=0, target="next")
    a.label("next")
    a.emit(M.EBREAK)
    for w in (1, 4, 32):
        stats = system.run(a.build(), CoreConfig(serial_width=w))
        total = sum(c for _, c in stats.classes.values())
        assert total == stats.cycles - stats.startup_cycles


def test_console_mmio_and_width_invariance():
    a = Assembler(base=0x1000)
    a.li(1, golden.CONSOLE_ADDR)
    for ch in b"hi":
        a.li(2, ch)
        a.emit(M.SW, rs1=1, rs2=2, imm=0)
    a.emit(M.EBREAK)
    img = a.build()
    outputs = {system.run(img, CoreConfig(serial_width=w)).console
               for w in (1, 2, 4, 8, 16, 32)}
    assert outputs == {b"hi"}


def test_exit_mmio_halts_with_code():
    a = Assembler(base=0x1000)
    a.li(1, golden.EXIT_ADDR)
    a.li(2, 7)
    a.emit(M.SW, rs1=1, rs2=2, imm=0)
    a.emit(M.ADDI, rd=3, rs1=0, imm=1)  # must not execute
    a.emit(M.EBREAK)
    stats = system.run(a.build(), CoreConfig(serial_width=8))
    assert stats.halt == golden.ECALL and stats.exit_code == 7


def test_plain_ecall():
    stats = system.run(simple_image(instr(M.ECALL)), CoreConfig())
    assert stats.halt == golden.ECALL and stats.exit_code == 0


def test_trap_reason_reported():
    stats = system.run(simple_image(instr(M.LW, rd=1, rs1=0, imm=0x201)),
                       CoreConfig())
    assert stats.halt == golden.MISALIGNED_ACCESS


def test_instret_matches_golden():
    a = Assembler(base=0x1000)
    a.li(1, 10)
    a.label("loop")
    a.emit(M.ADDI, rd=1, rs1=1, imm=-1)
    a.emit(M.BNE, rs1=1, rs2=0, target="loop")
    a.emit(M.EBREAK)
    img = a.build()
    for w in (1, 8, 32):
        stats = system.run(img, CoreConfig(serial_width=w))
        _, instret, reason = system.run_golden(img)
        assert stats.instret == instret and stats.halt == reason


def test_stats_json_keys():
    stats = system.run(simple_image(instr(M.EBREAK)), CoreConfig(serial_width=4))
    d = json.loads(system.stats_to_json(stats))
    assert sorted(d) == ["classes", "code_size", "cpi", "cycles", "extensions",
                         "halt", "instret", "width"]
    assert d["width"] == 4
    assert d["classes"]["fence_nop"] == {"count": 1, "cycles": 1}


def test_trace_format():
    a = Assembler(base=0x1000)
    a.emit(M.ADDI, rd=1, rs1=0, imm=1)
    a.emit(M.EBREAK)
    buf = io.StringIO()
    system.run(a.build(), CoreConfig(serial_width=4), trace=buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2
    cycle, pc, raw, mnem, charged = lines[0].split(",")
    assert pc == "0x00001000" and mnem == "addi" and charged == "8"
    assert lines[1].split(",")[3] == "ebreak"


def test_run_determinism():
    a = Assembler(base=0x1000)
    a.li(1, 99)
    a.emit(M.ADD, rd=2, rs1=1, rs2=1)
    a.emit(M.EBREAK)
    img = a.build()
    r1 = system.run(img, CoreConfig(serial_width=2))
    r2 = system.run(img, CoreConfig(serial_width=2))
    assert r1.cycles == r2.cycles and r1.classes == r2.classes


def test_ten_adds_cost_model():
    a = Assembler(base=0x1000)
    for _ in range(10):
        a.emit(M.ADD, rd=1, rs1=1, rs2=2)
    a.emit(M.EBREAK)
    stats = system.run(a.build(), CoreConfig(serial_width=8))
    assert stats.instret == 11
    assert stats.cycles == stats.startup_cycles + 10 * 4 + 1
