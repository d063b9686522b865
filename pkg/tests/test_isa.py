import random

import pytest
from hypothesis import given, settings, strategies as st

from serialrv import isa
from serialrv.image import ProgramImage
from serialrv.isa import (Assembler, Ext, FieldRange, IllegalInstruction,
                          Instr, Label, Mnemonic as M, UnresolvedLabel, Word,
                          assemble, decode, disassemble, encode, instr)

# encodings pinned against the ratified base/bitmanip/crypto tables
KNOWN_WORDS = {
    0x00000013: "addi x0, x0, 0",
    0x00100093: "addi x1, x0, 1",
    0x00100073: "ebreak",
    0x00000073: "ecall",
    0x00008067: "jalr x0, 0(x1)",       # ret
    0x00208233: "add x4, x1, x2",
    0x40208233: "sub x4, x1, x2",
    0x00209233: "sll x4, x1, x2",
    0xFE209EE3: "bne x1, x2, -4",
    0x0000A203: "lw x4, 0(x1)",
    0x0020A023: "sw x2, 0(x1)",
    0x6020D213: "rori x4, x1, 2",
    0x60209233: "rol x4, x1, x2",
    0x6020D233: "ror x4, x1, x2",
    0x4020F233: "andn x4, x1, x2",
    0x4020E233: "orn x4, x1, x2",
    0x0820C233: "pack x4, x1, x2",
    0x0A209233: "clmul x4, x1, x2",
    0x2820A233: "xperm4 x4, x1, x2",
    0x6980D213: "rev8 x4, x1",
    0x6870D213: "brev8 x4, x1",
    0x08F09213: "zip x4, x1",
    0x08F0D213: "unzip x4, x1",
    0x10209213: "sha256sig0 x4, x1",
    0x10109213: "sha256sum1 x4, x1",
    0xE6220233: "aes32esmi x4, x4, x2, 3",
}


def test_known_encodings_decode():
    for word, text in KNOWN_WORDS.items():
        assert disassemble(decode(word)) == text


def test_known_encodings_round_trip():
    for word in KNOWN_WORDS:
        assert encode(decode(word)) == word


def test_all_zero_and_all_ones_are_illegal():
    with pytest.raises(IllegalInstruction):
        decode(0x00000000)
    with pytest.raises(IllegalInstruction):
        decode(0xFFFFFFFF)


def test_compressed_words_rejected():
    for low2 in (0b00, 0b01, 0b10):
        with pytest.raises(IllegalInstruction):
            decode(0x00000010 | low2)


def test_extension_partition():
    seen = {}
    for m in M:
        assert m in isa.EXT_OF
        seen.setdefault(isa.EXT_OF[m], []).append(m)
    assert Ext.ZKT not in seen  # zkt owns no mnemonics
    total = sum(len(v) for v in seen.values())
    assert total == len(list(M))


def test_zkt_coverage_flags():
    for m in M:
        if isa.EXT_OF[m] is not Ext.RV32I:
            assert isa.zkt_covered(m), m
    for m in (M.SLL, M.SRAI, M.ADD, M.SUB, M.XORI, M.AND):
        assert isa.zkt_covered(m)
    for m in (M.BEQ, M.LW, M.SW, M.JAL, M.LUI, M.SLT, M.EBREAK):
        assert not isa.zkt_covered(m)


def _operands_for(m):
    fmt = isa.ENCODINGS[m].fmt
    kw = {}
    if fmt in (isa.FMT_R, isa.FMT_R_AES):
        kw = dict(rd=3, rs1=17, rs2=29)
        if fmt == isa.FMT_R_AES:
            kw["bs"] = 2
    elif fmt == isa.FMT_I_SHAMT:
        kw = dict(rd=1, rs1=2, imm=31)
    elif fmt in (isa.FMT_I, isa.FMT_LOAD, isa.FMT_JALR):
        kw = dict(rd=1, rs1=2, imm=-2048)
    elif fmt == isa.FMT_UNARY:
        kw = dict(rd=30, rs1=31)
    elif fmt == isa.FMT_STORE:
        kw = dict(rs1=2, rs2=3, imm=2047)
    elif fmt == isa.FMT_BRANCH:
        kw = dict(rs1=4, rs2=5, imm=-4096)
    elif fmt == isa.FMT_U:
        kw = dict(rd=6, imm=0xFFFFF)
    elif fmt == isa.FMT_JAL:
        kw = dict(rd=1, imm=-(1 << 20))
    return kw


@pytest.mark.parametrize("m", list(M))
def test_builder_round_trip_every_mnemonic(m):
    i = instr(m, **_operands_for(m))
    assert decode(encode(i)) == i


@given(st.integers(min_value=0, max_value=0xFFFFFFFF))
@settings(max_examples=2000, deadline=None)
def test_decode_totality_and_reencode(word):
    try:
        i = decode(word)
    except IllegalInstruction:
        return
    assert encode(i) == word


def test_random_encode_decode_identity():
    rng = random.Random(7)
    for _ in range(2000):
        m = rng.choice(list(M))
        fmt = isa.ENCODINGS[m].fmt
        kw = dict(rd=rng.randrange(32), rs1=rng.randrange(32),
                  rs2=rng.randrange(32))
        if fmt == isa.FMT_R_AES:
            kw["bs"] = rng.randrange(4)
        if fmt == isa.FMT_I_SHAMT:
            kw["imm"] = rng.randrange(32)
        elif fmt in (isa.FMT_I, isa.FMT_LOAD, isa.FMT_JALR, isa.FMT_STORE):
            kw["imm"] = rng.randrange(-2048, 2048)
        elif fmt == isa.FMT_BRANCH:
            kw["imm"] = rng.randrange(-2048, 2048) * 2
        elif fmt == isa.FMT_U:
            kw["imm"] = rng.getrandbits(20)
        elif fmt == isa.FMT_JAL:
            kw["imm"] = rng.randrange(-(1 << 19), 1 << 19) * 2
        i = instr(m, **{k: v for k, v in kw.items()
                        if k in isa._FIELDS_OF_FMT[fmt] or k == "bs"})
        assert decode(encode(i)) == i


def test_field_range_errors():
    with pytest.raises(FieldRange):
        instr(M.RORI, rd=1, rs1=1, imm=32)
    with pytest.raises(FieldRange):
        instr(M.ADDI, rd=1, rs1=1, imm=2048)
    with pytest.raises(FieldRange):
        instr(M.BEQ, rs1=1, rs2=2, imm=3)  # odd offset
    with pytest.raises(FieldRange):
        instr(M.ADD, rd=32, rs1=0, rs2=0)
    with pytest.raises(FieldRange):
        encode(Instr(M.AES32ESI, 1, 1, 1, 0, 4))
    with pytest.raises(FieldRange):
        encode(Instr(M.ADD, 1, 1, 1, 0, 1))  # bs on a non-AES op


def test_aes_bs_field_position():
    i = instr(M.AES32ESMI, rd=1, rs1=1, rs2=2, bs=3)
    assert encode(i) >> 30 == 0b11
    assert decode(encode(i)).bs == 3


# --- assembler -------------------------------------------------------------

def test_assemble_empty_sequence():
    img = assemble([])
    assert isinstance(img, ProgramImage)
    assert len(img.data) == 0 and img.code_size == 0


def test_assemble_single_ebreak():
    img = assemble([instr(M.EBREAK)])
    assert len(img.data) == 4
    assert int.from_bytes(img.data, "little") == 0x00100073


def test_backward_branch_offset():
    a = Assembler(base=0x1000)
    a.label("loop")
    a.emit(M.ADDI, rd=1, rs1=1, imm=-1)
    a.emit(M.BNE, rs1=1, rs2=0, target="loop")
    img = a.build()
    branch = decode(int.from_bytes(img.data[4:8], "little"))
    assert branch.imm == -4  # one instruction back


def test_forward_branch_offset():
    a = Assembler(base=0x1000)
    a.emit(M.BEQ, rs1=0, rs2=0, target="out")
    a.nop()
    a.nop()
    a.label("out")
    a.emit(M.EBREAK)
    img = a.build()
    branch = decode(int.from_bytes(img.data[0:4], "little"))
    assert branch.imm == 12


def test_unresolved_label():
    a = Assembler(base=0x1000)
    a.emit(M.JAL, rd=0, target="nowhere")
    with pytest.raises(UnresolvedLabel):
        a.build()


def test_branch_out_of_range_is_field_error():
    a = Assembler(base=0x1000)
    a.emit(M.BEQ, rs1=0, rs2=0, target="far")
    for _ in range(2000):
        a.nop()
    a.label("far")
    with pytest.raises(FieldRange):
        a.build()


def test_li_small_and_large():
    a = Assembler(base=0)
    a.li(1, 42)
    a.li(2, 0x12345678)
    a.li(3, -1)
    img = a.build()
    words = [int.from_bytes(img.data[i:i + 4], "little")
             for i in range(0, len(img.data), 4)]
    assert len(words) == 4  # addi, lui+addi, addi
    assert decode(words[0]).imm == 42
    assert decode(words[3]).imm == -1


def test_assemble_record_forms():
    img = assemble([
        ("addi", dict(rd=1, rs1=0, imm=5)),
        Label("done"),
        Word(0xDEADBEEF),
        instr(M.EBREAK),
    ])
    assert len(img.data) == 12
    assert int.from_bytes(img.data[4:8], "little") == 0xDEADBEEF


def test_disassembly_formats():
    assert disassemble(decode(0x00000013)) == "addi x0, x0, 0"
    assert disassemble(instr(M.LUI, rd=1, imm=0x12345)) == "lui x1, 0x12345"
    assert disassemble(instr(M.LW, rd=1, rs1=2, imm=8)) == "lw x1, 8(x2)"
    assert disassemble(instr(M.SW, rs1=2, rs2=3, imm=-4)) == "sw x3, -4(x2)"
    assert disassemble(instr(M.JAL, rd=1, imm=2048)) == "jal x1, 2048"
    assert disassemble(instr(M.FENCE)) == "fence"
    assert disassemble(instr(M.SHA512SIG0H, rd=1, rs1=2, rs2=3)) == \
        "sha512sig0h x1, x2, x3"
