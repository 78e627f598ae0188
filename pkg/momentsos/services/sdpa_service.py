"""
SDPA Service - Sparse SDPA format export and import

A program min <C, X> s.t. <A_i, X> = b_i is written as the SDPA dual form
max <F0, Y> s.t. <F_i, Y> = c_i with F0 = -C, F_i = A_i and c = b.
Non-negative blocks carry a negative size. A free block of size k is split
into x+ - x- and written as a non-negative block of size 2k, the negated
copy occupying positions k+1..2k.
"""
import logging

from momentsos.errors import ProgramError
from momentsos.models.conic import NONNEG, PSD, ConicProgram

logger = logging.getLogger(__name__)

DEFAULT_COMMENT = 'momentsos program'


def _layout(program):
    """(written size, split offset or None) per block."""
    layout = []
    for cone in program.blocks:
        if cone.kind == PSD:
            layout.append((cone.size, None))
        elif cone.kind == NONNEG:
            layout.append((-cone.size, None))
        else:
            layout.append((-2 * cone.size, cone.size))
    return layout


def _emit(records, matno, block, split, coeffs, sign):
    for (i, j), value in coeffs.items():
        records.append((matno, block + 1, i + 1, j + 1, sign * value))
        if split is not None:
            records.append((matno, block + 1, i + 1 + split, j + 1 + split, -sign * value))


def export_sdpa(program, comment=None):
    """Render a program as SDPA sparse text."""
    layout = _layout(program)
    records = []
    for block, coeffs in enumerate(program.objective):
        _emit(records, 0, block, layout[block][1], coeffs, -1.0)
    for row, entries in enumerate(program.constraints):
        for block, coeffs in entries.items():
            _emit(records, row + 1, block, layout[block][1], coeffs, 1.0)
    records.sort(key=lambda r: r[:4])
    text = (comment or program.name or DEFAULT_COMMENT).replace('\n', ' ')
    lines = [
        f'"{text}',
        str(program.num_constraints),
        str(program.num_blocks),
        ' '.join(str(size) for size, _ in layout),
        ' '.join(repr(float(v)) for v in program.rhs),
    ]
    lines.extend(f'{m} {b} {i} {j} {repr(float(v))}' for m, b, i, j, v in records)
    return '\n'.join(lines) + '\n'


def write_sdpa(program, path, comment=None):
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(export_sdpa(program, comment))
    logger.info('wrote SDPA file %s (%d constraints, %d blocks)',
                path, program.num_constraints, program.num_blocks)


def _tokens(text):
    name = None
    tokens = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith('"') or stripped.startswith('*'):
            if name is None:
                name = stripped[1:].strip()
            continue
        for ch in ',{}()':
            stripped = stripped.replace(ch, ' ')
        tokens.extend(stripped.split())
    return name, tokens


def parse_sdpa(text):
    """Parse SDPA sparse text into a ConicProgram (non-negative blocks stay non-negative)."""
    name, tokens = _tokens(text)
    position = 0

    def take(count, cast, what):
        nonlocal position
        if position + count > len(tokens):
            raise ProgramError(f'SDPA data ends while reading {what}')
        try:
            values = [cast(t) for t in tokens[position:position + count]]
        except ValueError:
            raise ProgramError(f'malformed SDPA token while reading {what}')
        position += count
        return values

    (m,) = take(1, int, 'the constraint count')
    (num_blocks,) = take(1, int, 'the block count')
    sizes = take(num_blocks, int, 'the block structure')
    rhs = take(m, float, 'the objective vector')
    program = ConicProgram(name=name)
    for size in sizes:
        if size == 0:
            raise ProgramError('SDPA block of size 0')
        program.add_block(PSD if size > 0 else NONNEG, abs(size))

    rows = [[] for _ in range(m)]
    remaining = len(tokens) - position
    if remaining % 5:
        raise ProgramError('SDPA entries must come in groups of five')
    for _ in range(remaining // 5):
        matno, block, i, j = take(4, int, 'an entry index')
        (value,) = take(1, float, 'an entry value')
        if not 0 <= matno <= m or not 1 <= block <= num_blocks:
            raise ProgramError(f'SDPA entry references matrix {matno}, block {block}')
        if matno == 0:
            program.add_objective(block - 1, i - 1, j - 1, -value)
        else:
            rows[matno - 1].append((block - 1, i - 1, j - 1, value))
    for entries, b in zip(rows, rhs):
        program.add_constraint(entries, b)
    return program


def read_sdpa(path):
    with open(path, encoding='utf-8') as handle:
        return parse_sdpa(handle.read())


