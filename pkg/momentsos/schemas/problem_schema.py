"""
Problem Schemas - Validation and loading of versioned JSON problem files
"""
import json
from dataclasses import dataclass, field
from typing import List, Optional

from marshmallow import Schema, ValidationError, fields, validate, validates_schema

from momentsos.errors import DimensionMismatchError, GpmError, ProblemFileError
from momentsos.models.polynomial import Polynomial, SemialgebraicSet, canonical_basis
from momentsos.models.problems import GpmMeasure, GpmProblem, MomentConstraint, PopProblem

FILE_VERSION = 1

KIND_POP = 'pop'
KIND_SOS_CHECK = 'sos-check'
KIND_GPM = 'gpm'
KIND_VOLUME = 'volume'
KIND_PROB_BOUND = 'prob-bound'
KIND_SUPERRES = 'superres'

VALID_KINDS = [KIND_POP, KIND_SOS_CHECK, KIND_GPM, KIND_VOLUME, KIND_PROB_BOUND, KIND_SUPERRES]

CODE_SYNTAX = 'syntax'
CODE_VERSION = 'version'
CODE_UNKNOWN_KIND = 'unknown-kind'
CODE_SCHEMA = 'schema'
CODE_UNDECLARED = 'undeclared-variable'
CODE_DEGREE = 'degree-mismatch'


class TermSchema(Schema):
    """One polynomial term, by exponent vector or by named powers."""

    exponents = fields.List(fields.Integer(validate=validate.Range(min=0)))
    powers = fields.Dict(keys=fields.String(), values=fields.Integer(validate=validate.Range(min=0)))
    coeff = fields.Float(required=True, allow_nan=False)

    @validates_schema
    def check_form(self, data, **kwargs):
        if ('exponents' in data) == ('powers' in data):
            raise ValidationError('give exactly one of exponents or powers')


def polynomial_field(**kwargs):
    return fields.List(fields.Nested(TermSchema), **kwargs)


class MomentSchema(Schema):
    alpha = fields.List(fields.Integer(validate=validate.Range(min=0)), required=True)
    value = fields.Float(required=True, allow_nan=False)


class BaseProblemSchema(Schema):
    version = fields.Integer(required=True)
    kind = fields.String(required=True)
    name = fields.String()
    variables = fields.List(fields.String(), required=True, validate=validate.Length(min=1))


class PopSchema(BaseProblemSchema):
    objective = polynomial_field(required=True)
    constraints = fields.List(polynomial_field(), load_default=list)
    ball_radius_sq = fields.Float(allow_none=True, validate=validate.Range(min=0, min_inclusive=False))


class SosCheckSchema(BaseProblemSchema):
    polynomial = polynomial_field(required=True)


class GpmTermSchema(Schema):
    measure = fields.Integer(required=True, validate=validate.Range(min=0))
    polynomial = polynomial_field(required=True)


class GpmConstraintSchema(Schema):
    terms = fields.List(fields.Nested(GpmTermSchema), required=True, validate=validate.Length(min=1))
    rhs = fields.Float(required=True, allow_nan=False)


class GpmMeasureSchema(Schema):
    constraints = fields.List(polynomial_field(), load_default=list)
    cost = polynomial_field(load_default=list)
    ball_radius_sq = fields.Float(allow_none=True, validate=validate.Range(min=0, min_inclusive=False))


class GpmSchema(BaseProblemSchema):
    measures = fields.List(fields.Nested(GpmMeasureSchema), required=True,
                           validate=validate.Length(min=1))
    equalities = fields.List(fields.Nested(GpmConstraintSchema), load_default=list)
    inequalities = fields.List(fields.Nested(GpmConstraintSchema), load_default=list)
    sense = fields.String(load_default=GpmProblem.SENSE_MIN,
                          validate=validate.OneOf(GpmProblem.VALID_SENSES))


class VolumeSchema(BaseProblemSchema):
    set = fields.List(polynomial_field(), required=True)
    box = fields.List(fields.List(fields.Float(allow_nan=False), validate=validate.Length(equal=2)),
                      required=True)


class ProbBoundSchema(BaseProblemSchema):
    moments = fields.List(fields.Nested(MomentSchema), required=True, validate=validate.Length(min=1))
    support = fields.List(polynomial_field(), required=True)
    event = fields.List(polynomial_field(), required=True)
    direction = fields.String(load_default='upper', validate=validate.OneOf(['upper', 'lower']))


class SuperresSchema(BaseProblemSchema):
    moments = fields.List(fields.Nested(MomentSchema), required=True, validate=validate.Length(min=1))
    moment_order = fields.Integer(required=True, validate=validate.Range(min=0))
    support = fields.List(polynomial_field(), load_default=list)


SCHEMAS = {
    KIND_POP: PopSchema,
    KIND_SOS_CHECK: SosCheckSchema,
    KIND_GPM: GpmSchema,
    KIND_VOLUME: VolumeSchema,
    KIND_PROB_BOUND: ProbBoundSchema,
    KIND_SUPERRES: SuperresSchema,
}


@dataclass
class ProblemFile:
    """A validated problem file and the domain objects built from it."""

    version: int
    kind: str
    variables: List[str]
    problem: object
    name: Optional[str] = None
    source: Optional[str] = None
    data: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.variables)

    def to_dict(self):
        return {'version': self.version, 'kind': self.kind, 'variables': list(self.variables),
                'name': self.name, 'source': self.source}


def _first_path(messages, prefix=()):
    """Dotted path and message of the first leaf in a marshmallow error tree."""
    if isinstance(messages, dict):
        key = sorted(messages, key=str)[0]
        return _first_path(messages[key], prefix + (str(key),))
    if isinstance(messages, list) and messages and isinstance(messages[0], (dict, list)):
        return _first_path(messages[0], prefix)
    text = messages[0] if isinstance(messages, list) and messages else str(messages)
    return '.'.join(prefix), text


def _line_of(text, key):
    if text is None:
        return None
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _location(text, path):
    top = path.split('.')[0] if path else None
    line = _line_of(text, top) if top else None
    return f'{path} (line {line})' if line else path


class _Builder:
    """Turns validated records into polynomials, sets and problems."""

    def __init__(self, variables, text):
        self.variables = variables
        self.n = len(variables)
        self.text = text

    def error(self, message, code, path):
        return ProblemFileError(message, code=code, location=_location(self.text, path))

    def polynomial(self, records, path):
        terms = {}
        for k, record in enumerate(records):
            if 'powers' in record:
                alpha = [0] * self.n
                for name, power in record['powers'].items():
                    if name not in self.variables:
                        raise self.error(f'variable {name!r} is not declared', CODE_UNDECLARED,
                                         f'{path}.{k}.powers')
                    alpha[self.variables.index(name)] += power
            else:
                alpha = record['exponents']
                if len(alpha) != self.n:
                    raise self.error(f'exponent vector {alpha} has {len(alpha)} entries for '
                                     f'{self.n} variables', CODE_SCHEMA, f'{path}.{k}.exponents')
            alpha = tuple(alpha)
            terms[alpha] = terms.get(alpha, 0.0) + record['coeff']
        return Polynomial(self.n, terms)

    def semialgebraic(self, constraints, path, ball=None):
        polys = tuple(self.polynomial(c, f'{path}.{k}') for k, c in enumerate(constraints))
        return SemialgebraicSet(self.n, polys, ball)

    def moments(self, records, path):
        moments = {}
        for k, record in enumerate(records):
            alpha = tuple(record['alpha'])
            if len(alpha) != self.n:
                raise self.error(f'moment exponent {list(alpha)} has {len(alpha)} entries for '
                                 f'{self.n} variables', CODE_SCHEMA, f'{path}.{k}.alpha')
            if alpha in moments:
                raise self.error(f'moment {list(alpha)} given twice', CODE_SCHEMA, f'{path}.{k}')
            moments[alpha] = record['value']
        return moments

    def build(self, kind, data):
        if kind == KIND_POP:
            f = self.polynomial(data['objective'], 'objective')
            S = self.semialgebraic(data['constraints'], 'constraints', data.get('ball_radius_sq'))
            return PopProblem(f, S)
        if kind == KIND_SOS_CHECK:
            return self.polynomial(data['polynomial'], 'polynomial')
        if kind == KIND_GPM:
            return self.gpm(data)
        if kind == KIND_VOLUME:
            box = [tuple(side) for side in data['box']]
            if len(box) != self.n:
                raise self.error(f'box has {len(box)} sides for {self.n} variables', CODE_SCHEMA, 'box')
            if any(lo >= hi for lo, hi in box):
                raise self.error('box sides need lo < hi', CODE_SCHEMA, 'box')
            return {'set': self.semialgebraic(data['set'], 'set'), 'box': box}
        if kind == KIND_PROB_BOUND:
            return {
                'moments': self.moments(data['moments'], 'moments'),
                'support': self.semialgebraic(data['support'], 'support'),
                'event': self.semialgebraic(data['event'], 'event'),
                'direction': data['direction'],
            }
        return self.superres(data)

    def gpm(self, data):
        measures = []
        for i, record in enumerate(data['measures']):
            S = self.semialgebraic(record['constraints'], f'measures.{i}.constraints',
                                   record.get('ball_radius_sq'))
            measures.append(GpmMeasure(S, self.polynomial(record['cost'], f'measures.{i}.cost')))

        def constraints(key):
            built = []
            for k, record in enumerate(data[key]):
                terms = []
                for t, term in enumerate(record['terms']):
                    if term['measure'] >= len(measures):
                        raise self.error(f'measure {term["measure"]} does not exist', CODE_SCHEMA,
                                         f'{key}.{k}.terms.{t}.measure')
                    terms.append((term['measure'],
                                  self.polynomial(term['polynomial'], f'{key}.{k}.terms.{t}.polynomial')))
                built.append(MomentConstraint(tuple(terms), record['rhs']))
            return tuple(built)

        try:
            return GpmProblem(measures=tuple(measures), equalities=constraints('equalities'),
                              inequalities=constraints('inequalities'), sense=data['sense'])
        except (GpmError, DimensionMismatchError) as exc:
            raise self.error(exc.message, CODE_SCHEMA, 'measures')

    def superres(self, data):
        t = data['moment_order']
        moments = self.moments(data['moments'], 'moments')
        too_high = [list(a) for a in moments if sum(a) > t]
        if too_high:
            raise self.error(f'moments {too_high[:3]} exceed moment_order {t}', CODE_DEGREE, 'moments')
        missing = [list(a) for a in canonical_basis(self.n, t) if a not in moments]
        if missing:
            raise self.error(f'moment_order {t} needs moments {missing[:3]}', CODE_DEGREE, 'moments')
        return {'moments': moments, 't': t, 'support': self.semialgebraic(data['support'], 'support')}


def load_problem(text, source=None):
    """Validate problem-file text and build its domain objects."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f'invalid JSON: {exc.msg}', code=CODE_SYNTAX,
                               location=f'line {exc.lineno}, column {exc.colno}')
    if not isinstance(raw, dict):
        raise ProblemFileError('a problem file must be a JSON object', code=CODE_SCHEMA)
    if raw.get('version') != FILE_VERSION:
        raise ProblemFileError(f'unsupported version {raw.get("version")!r}; expected {FILE_VERSION}',
                               code=CODE_VERSION, location=_location(text, 'version'))
    kind = raw.get('kind')
    if kind not in SCHEMAS:
        raise ProblemFileError(f'unknown kind {kind!r}; expected one of {VALID_KINDS}',
                               code=CODE_UNKNOWN_KIND, location=_location(text, 'kind'))
    try:
        data = SCHEMAS[kind]().load(raw)
    except ValidationError as exc:
        path, message = _first_path(exc.messages)
        raise ProblemFileError(f'{path}: {message}', code=CODE_SCHEMA, location=_location(text, path))
    variables = data['variables']
    if len(set(variables)) != len(variables):
        raise ProblemFileError('variable names must be distinct', code=CODE_SCHEMA,
                               location=_location(text, 'variables'))
    problem = _Builder(variables, text).build(kind, data)
    return ProblemFile(version=data['version'], kind=kind, variables=variables, problem=problem,
                       name=data.get('name'), source=source, data=data)


def parse_problem(path):
    """Read and validate a problem file from disk."""
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as exc:
        raise ProblemFileError(f'cannot read {path}: {exc.strerror}', code=CODE_SYNTAX)
    return load_problem(text, source=str(path))
