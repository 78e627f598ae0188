"""
Tests for SDPA sparse export and import
"""
import pytest

from momentsos.errors import ProgramError
from momentsos.models.conic import FREE, NONNEG, PSD, ConicProgram
from momentsos.services.hierarchy_service import build_dual_sos, build_primal_relaxation
from momentsos.services.sdpa_service import export_sdpa, parse_sdpa, read_sdpa, write_sdpa


def tiny_program():
    program = ConicProgram(name='tiny')
    block = program.add_block(PSD, 1)
    program.add_objective(block, 0, 0, 1.0)
    program.add_constraint([(block, 0, 0, 1.0)], 1.0)
    return program


def test_smallest_instance():
    assert export_sdpa(tiny_program()) == (
        '"tiny\n'
        '1\n'
        '1\n'
        '1\n'
        '1.0\n'
        '0 1 1 1 -1.0\n'
        '1 1 1 1 1.0\n'
    )


def test_nonneg_block_has_negative_size():
    program = ConicProgram()
    psd = program.add_block(PSD, 2)
    lp = program.add_block(NONNEG, 3)
    program.add_constraint([(psd, 0, 1, 0.5), (lp, 2, 2, 1.0)], 4.0)
    lines = export_sdpa(program, comment='mixed').splitlines()
    assert lines[0] == '"mixed'
    assert lines[3] == '2 -3'
    assert lines[5:] == ['1 1 1 2 0.5', '1 2 3 3 1.0']


def test_free_block_is_split():
    program = ConicProgram()
    free = program.add_block(FREE, 2)
    program.add_objective(free, 1, 1, 3.0)
    program.add_constraint([(free, 0, 0, 1.0)], 2.0)
    lines = export_sdpa(program).splitlines()
    assert lines[3] == '-4'
    assert '0 1 2 2 -3.0' in lines
    assert '0 1 4 4 3.0' in lines
    assert '1 1 1 1 1.0' in lines
    assert '1 1 3 3 -1.0' in lines


def test_round_trip_is_byte_identical(univariate_problem):
    for program in (build_primal_relaxation(univariate_problem, 2).program,
                    build_dual_sos(univariate_problem, 2).program,
                    tiny_program()):
        text = export_sdpa(program)
        assert export_sdpa(parse_sdpa(text)) == text


def test_parse_restores_numeric_content(univariate_problem):
    program = build_dual_sos(univariate_problem, 2).program
    parsed = parse_sdpa(export_sdpa(program))
    assert parsed.rhs == program.rhs
    assert parsed.blocks[0].kind == NONNEG and parsed.blocks[0].size == 2
    assert parsed.blocks[1:] == program.blocks[1:]
    assert parsed.objective[1:] == program.objective[1:]
    for original, restored in zip(program.constraints, parsed.constraints):
        assert {b: c for b, c in restored.items() if b} == {b: c for b, c in original.items() if b}


def test_parser_tolerates_punctuation():
    text = '* a comment\n1\n1\n{1}\n(2.5)\n0,1,1,1,-1.0\n1 1 1 1 1.0\n'
    program = parse_sdpa(text)
    assert program.name == 'a comment'
    assert program.rhs == [2.5]
    assert program.objective[0] == {(0, 0): 1.0}


def test_parser_rejects_truncated_data():
    with pytest.raises(ProgramError):
        parse_sdpa('2\n1\n1\n1.0\n')
    with pytest.raises(ProgramError):
        parse_sdpa('1\n1\n1\n1.0\n1 1 1 1\n')


def test_write_and_read(tmp_path):
    path = tmp_path / 'tiny.dat-s'
    write_sdpa(tiny_program(), path)
    program = read_sdpa(path)
    assert program.name == 'tiny'
    assert export_sdpa(program) == export_sdpa(tiny_program())
