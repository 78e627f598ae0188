"""
Tests for problem-file validation and loading
"""
import json

import pytest

from conftest import poly
from momentsos.errors import ProblemFileError
from momentsos.models.problems import GpmProblem, PopProblem
from momentsos.schemas import load_problem, parse_problem
from momentsos.schemas.problem_schema import (
    CODE_DEGREE,
    CODE_SCHEMA,
    CODE_SYNTAX,
    CODE_UNDECLARED,
    CODE_UNKNOWN_KIND,
    CODE_VERSION,
    KIND_GPM,
    KIND_POP,
    KIND_PROB_BOUND,
    KIND_SOS_CHECK,
    KIND_SUPERRES,
    KIND_VOLUME,
)


def pop_document(**overrides):
    document = {
        'version': 1,
        'kind': 'pop',
        'variables': ['x'],
        'objective': [{'exponents': [2], 'coeff': 1.0}],
        'constraints': [],
    }
    document.update(overrides)
    return json.dumps(document, indent=2)


def error_of(text):
    with pytest.raises(ProblemFileError) as info:
        load_problem(text)
    return info.value


@pytest.mark.parametrize('filename, kind', [
    ('univar.json', KIND_POP),
    ('box.json', KIND_POP),
    ('motzkin.json', KIND_SOS_CHECK),
    ('sum_square.json', KIND_SOS_CHECK),
    ('univar_gpm.json', KIND_GPM),
    ('disc_volume.json', KIND_VOLUME),
    ('interval_volume.json', KIND_VOLUME),
    ('prob_bound.json', KIND_PROB_BOUND),
    ('superres.json', KIND_SUPERRES),
])
def test_sample_problems_load(problems_dir, filename, kind):
    problem_file = parse_problem(problems_dir / filename)
    assert problem_file.kind == kind
    assert problem_file.version == 1
    assert problem_file.source.endswith(filename)


def test_polynomial_problem_is_built(problems_dir, univariate_problem):
    problem = parse_problem(problems_dir / 'univar.json').problem
    assert isinstance(problem, PopProblem)
    assert problem.f == univariate_problem.f
    assert problem.S.polynomials == univariate_problem.S.polynomials


def test_minimal_polynomial_problem():
    problem = load_problem(pop_document()).problem
    assert problem.f == poly(1, {(2,): 1.0})
    assert len(problem.constraints) == 0


def test_named_powers(problems_dir):
    problem_file = parse_problem(problems_dir / 'box.json')
    assert problem_file.variables == ['x1', 'x2']
    assert problem_file.problem.f == poly(2, {(1, 1): 1.0})
    assert problem_file.problem.S.polynomials[1] == poly(2, {(0, 0): 1.0, (0, 2): -1.0})


def test_repeated_terms_are_summed():
    text = pop_document(objective=[{'exponents': [1], 'coeff': 1.0}, {'powers': {'x': 1}, 'coeff': 2.0}])
    assert load_problem(text).problem.f == poly(1, {(1,): 3.0})


def test_application_problems_are_built(problems_dir, motzkin):
    assert parse_problem(problems_dir / 'motzkin.json').problem == motzkin

    gpm = parse_problem(problems_dir / 'univar_gpm.json').problem
    assert isinstance(gpm, GpmProblem)
    assert gpm.sense == GpmProblem.SENSE_MIN
    assert len(gpm.measures) == 1 and len(gpm.equalities) == 1

    volume = parse_problem(problems_dir / 'disc_volume.json').problem
    assert volume['box'] == [(-1.0, 1.0), (-1.0, 1.0)]
    assert volume['set'].n == 2

    bound = parse_problem(problems_dir / 'prob_bound.json').problem
    assert bound['direction'] == 'upper'
    assert bound['moments'][(0,)] == 1.0
    assert bound['moments'][(2,)] == pytest.approx(1.0 / 3.0)

    superres = parse_problem(problems_dir / 'superres.json').problem
    assert superres['t'] == 4
    assert superres['moments'][(1,)] == 1.5


def test_syntax_error_has_a_position():
    error = error_of('{"version": 1,\n "kind": ')
    assert error.code == CODE_SYNTAX
    assert error.location.startswith('line 2')
    assert error.exit_code == 2


def test_unsupported_version():
    error = error_of(pop_document(version=2))
    assert error.code == CODE_VERSION
    assert 'line 2' in error.location


def test_unknown_kind():
    assert error_of(pop_document(kind='lp')).code == CODE_UNKNOWN_KIND


@pytest.mark.parametrize('text', [
    '[1, 2]',
    json.dumps({'version': 1, 'kind': 'pop', 'variables': ['x']}),
    pop_document(variables=[]),
    pop_document(variables=['x', 'x']),
    pop_document(objective=[{'exponents': [1], 'powers': {'x': 1}, 'coeff': 1.0}]),
    pop_document(objective=[{'exponents': [1, 0], 'coeff': 1.0}]),
    pop_document(objective=[{'exponents': [-1], 'coeff': 1.0}]),
    pop_document(ball_radius_sq=0.0),
])
def test_schema_errors(text):
    assert error_of(text).code == CODE_SCHEMA


def test_missing_field_is_located():
    error = error_of(json.dumps({'version': 1, 'kind': 'pop', 'variables': ['x']}))
    assert error.location == 'objective'
    assert error.to_dict()['location'] == 'objective'


def test_undeclared_variable():
    error = error_of(pop_document(objective=[{'powers': {'y': 2}, 'coeff': 1.0}]))
    assert error.code == CODE_UNDECLARED
    assert error.location.startswith('objective.0.powers')
    assert "'y'" in error.message


def test_superres_moments_must_match_their_order():
    document = {
        'version': 1,
        'kind': 'superres',
        'variables': ['x'],
        'moment_order': 2,
        'moments': [{'alpha': [0], 'value': 1.0}, {'alpha': [1], 'value': 0.0}],
    }
    assert error_of(json.dumps(document)).code == CODE_DEGREE
    document['moments'].extend([{'alpha': [2], 'value': 0.5}, {'alpha': [3], 'value': 0.0}])
    assert error_of(json.dumps(document)).code == CODE_DEGREE


def test_gpm_constraint_must_reference_a_measure():
    document = {
        'version': 1,
        'kind': 'gpm',
        'variables': ['x'],
        'measures': [{'cost': [{'exponents': [1], 'coeff': 1.0}]}],
        'equalities': [{'terms': [{'measure': 1, 'polynomial': [{'exponents': [0], 'coeff': 1.0}]}],
                        'rhs': 1.0}],
    }
    error = error_of(json.dumps(document))
    assert error.code == CODE_SCHEMA
    assert error.location.startswith('equalities.0.terms.0.measure')


def test_unreadable_file(tmp_path):
    with pytest.raises(ProblemFileError) as info:
        parse_problem(tmp_path / 'missing.json')
    assert info.value.code == CODE_SYNTAX
