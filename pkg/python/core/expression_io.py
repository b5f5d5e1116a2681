"""
Expression I/O
==============
JSON codec for Expressions (pydantic schemas) and the small text syntax used
on the command line.

Text syntax:
    expr     := term (('+' | '-') term)*
    term     := ('+' | '-')* power ('*' power | '/' number)*
    power    := factor ('^' integer)?
    factor   := number | 'i' | '(' expr ')' | atom
    atom     := 'res' '(' number ',' function ')'
              | ('cliff' | 'field' | 'zeta') '(' function ')'
    function := fterm (('+' | '-') fterm)*
    fterm    := ('-')? (number '*')? fprimary
    fprimary := name | '[' number (',' number)* ']' | 'prime' '(' function ')' | '(' function ')'

Names are test functions bound in the suite configuration, e.g. `zeta(f1)*res(1, f2)`.
"""

import json
import logging
import re
from dataclasses import dataclass
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError

from .errors import ExpressionParseError
from .graded_algebra import (
    Atom,
    AtomKind,
    Expression,
    classify,
    cliff,
    field,
    format_atom,
    format_coeff,
    res,
    scalar,
    unit,
    zeta,
)
from .space_model import SpaceModel, TestFunction, prime

logger = logging.getLogger(__name__)


# ============================================================
# JSON SCHEMAS
# ============================================================


class AtomSchema(BaseModel):
    kind: Literal['cliff', 'field', 'res'] = Field(..., description='Generator kind')
    coeffs: list[float] = Field(..., description='Argument coordinates in the model basis')
    lam: float | None = Field(default=None, alias='lambda', description='Resolvent parameter (res only)')

    model_config = {'populate_by_name': True}


class TermSchema(BaseModel):
    coeff: tuple[float, float] = Field(..., description='Complex coefficient as [re, im]')
    word: list[AtomSchema] = Field(default_factory=list, description='Ordered atoms; empty word is the unit')


class ExpressionSchema(BaseModel):
    terms: list[TermSchema] = Field(default_factory=list)
    expr_class: str | None = Field(default=None, alias='class', description='Classification at export time')
    core: bool = Field(default=False, description='Core-algebra provenance flag')

    model_config = {'populate_by_name': True}


def expression_to_dict(expr: Expression) -> dict[str, Any]:
    """{terms: [{coeff: [re, im], word: [{kind, lambda?, coeffs}]}], class, core}."""
    terms = []
    for c, word in expr.terms:
        atoms = []
        for atom in word:
            entry: dict[str, Any] = {'kind': atom.kind.value, 'coeffs': list(atom.arg.coeffs)}
            if atom.kind == AtomKind.RES:
                entry['lambda'] = atom.lam
            atoms.append(entry)
        terms.append({'coeff': [c.real, c.imag], 'word': atoms})
    return {'terms': terms, 'class': classify(expr).value, 'core': expr.core}


def expression_from_dict(model: SpaceModel, data: dict[str, Any]) -> Expression:
    try:
        schema = ExpressionSchema.model_validate(data)
    except ValidationError as e:
        raise ExpressionParseError(f'Invalid expression JSON: {e.errors()[0]["msg"]}', 0) from e
    terms = []
    for term in schema.terms:
        word = []
        for atom in term.word:
            arg = TestFunction.from_array(model.coords(atom.coeffs))
            word.append(Atom(AtomKind(atom.kind), arg, atom.lam if atom.kind == 'res' else None))
        terms.append((complex(*term.coeff), tuple(word)))
    return Expression.from_terms(model, terms, core=schema.core)


def expression_to_json(expr: Expression, indent: int | None = None) -> str:
    return json.dumps(expression_to_dict(expr), indent=indent)


def expression_from_json(model: SpaceModel, text: str) -> Expression:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ExpressionParseError(f'Invalid JSON: {e.msg}', e.pos) from e
    return expression_from_dict(model, data)


# ============================================================
# TEXT SYNTAX
# ============================================================

_TOKEN_RE = re.compile(
    r'\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),\[\]]))'
)

_FUNCTIONS = {'cliff': cliff, 'field': field, 'zeta': zeta}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == '':
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.lastgroup is None:
            bad = len(text) - len(text[pos:].lstrip())
            raise ExpressionParseError(f'Unexpected character {text[bad]!r}', bad)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token('end', '', len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, text: str, model: SpaceModel, names: dict[str, TestFunction]):
        self.model = model
        self.names = names
        self.tokens = tokenize(text)
        self.i = 0

    # ---- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _accept(self, text: str) -> bool:
        if self.tok.kind == 'op' and self.tok.text == text:
            self.i += 1
            return True
        return False

    def _expect(self, text: str):
        if not self._accept(text):
            found = self.tok.text or 'end of input'
            raise ExpressionParseError(f'Expected {text!r}, found {found!r}', self.tok.pos)

    def _number(self) -> float:
        sign = 1.0
        while self.tok.kind == 'op' and self.tok.text in '+-':
            if self._advance().text == '-':
                sign = -sign
        if self.tok.kind != 'number':
            raise ExpressionParseError(f'Expected a number, found {self.tok.text or "end of input"!r}', self.tok.pos)
        return sign * float(self._advance().text)

    # ---- expressions -------------------------------------------------------

    def parse(self) -> Expression:
        expr = self._expr()
        if self.tok.kind != 'end':
            raise ExpressionParseError(f'Unexpected token {self.tok.text!r}', self.tok.pos)
        return expr

    def _expr(self) -> Expression:
        result = self._term()
        while self.tok.kind == 'op' and self.tok.text in '+-':
            if self._advance().text == '+':
                result = result + self._term()
            else:
                result = result - self._term()
        return result

    def _term(self) -> Expression:
        sign = 1.0
        while self.tok.kind == 'op' and self.tok.text in '+-':
            if self._advance().text == '-':
                sign = -sign
        result = self._power()
        while True:
            if self._accept('*'):
                result = result * self._power()
            elif self._accept('/'):
                pos = self.tok.pos
                divisor = self._number()
                if divisor == 0:
                    raise ExpressionParseError('Division by zero', pos)
                result = result / divisor
            else:
                break
        return result if sign > 0 else -result

    def _power(self) -> Expression:
        base = self._factor()
        if self._accept('^'):
            tok = self.tok
            if tok.kind != 'number' or not tok.text.isdigit():
                raise ExpressionParseError('Exponent must be a non-negative integer', tok.pos)
            self._advance()
            result = unit(self.model)
            for _ in range(int(tok.text)):
                result = result * base
            return result
        return base

    def _factor(self) -> Expression:
        tok = self.tok
        if tok.kind == 'number':
            self._advance()
            return scalar(self.model, float(tok.text))
        if self._accept('('):
            inner = self._expr()
            self._expect(')')
            return inner
        if tok.kind == 'name':
            if tok.text == 'i':
                self._advance()
                return scalar(self.model, 1j)
            if tok.text == 'res':
                self._advance()
                self._expect('(')
                lam_pos = self.tok.pos
                lam = self._number()
                if lam == 0:
                    raise ExpressionParseError('res: λ must be nonzero', lam_pos)
                self._expect(',')
                f = self._function()
                self._expect(')')
                return res(self.model, lam, f)
            if tok.text in _FUNCTIONS:
                self._advance()
                self._expect('(')
                f = self._function()
                self._expect(')')
                return _FUNCTIONS[tok.text](self.model, f)
            raise ExpressionParseError(f'Unknown operator {tok.text!r}', tok.pos)
        raise ExpressionParseError(f'Unexpected token {tok.text or "end of input"!r}', tok.pos)

    # ---- test functions ----------------------------------------------------

    def _function(self) -> TestFunction:
        result = self._fterm()
        while self.tok.kind == 'op' and self.tok.text in '+-':
            if self._advance().text == '+':
                result = result + self._fterm()
            else:
                result = result - self._fterm()
        return result

    def _fterm(self) -> TestFunction:
        sign = -1.0 if self._accept('-') else 1.0
        factor = 1.0
        if self.tok.kind == 'number':
            factor = float(self._advance().text)
            self._expect('*')
        return (sign * factor) * self._fprimary()

    def _fprimary(self) -> TestFunction:
        tok = self.tok
        if self._accept('['):
            values = [self._number()]
            while self._accept(','):
                values.append(self._number())
            self._expect(']')
            if len(values) != self.model.N:
                raise ExpressionParseError(f'Vector literal has length {len(values)}, expected {self.model.N}', tok.pos)
            return TestFunction.from_array(values)
        if self._accept('('):
            inner = self._function()
            self._expect(')')
            return inner
        if tok.kind == 'name':
            self._advance()
            if tok.text == 'prime':
                self._expect('(')
                inner = self._function()
                self._expect(')')
                return prime(self.model, inner)
            if tok.text not in self.names:
                raise ExpressionParseError(f'Unbound test function {tok.text!r}', tok.pos)
            return self.names[tok.text]
        raise ExpressionParseError(f'Expected a test function, found {tok.text or "end of input"!r}', tok.pos)


def bind_functions(model: SpaceModel, functions: dict[str, Any]) -> dict[str, TestFunction]:
    """Validate named coefficient lists against the model."""
    return {name: TestFunction.from_array(model.coords(coeffs)) for name, coeffs in functions.items()}


def parse_expression(text: str, model: SpaceModel, names: dict[str, TestFunction] | None = None) -> Expression:
    """Parse the text syntax into an Expression; errors carry the 0-based character position."""
    return _Parser(text, model, names or {}).parse()


def render_expression(expr: Expression, names: dict[str, TestFunction] | None = None) -> str:
    """Inverse of parse_expression; bound names replace matching vector literals."""
    if expr.is_zero:
        return '0'
    by_value = {f: name for name, f in (names or {}).items()}
    parts = []
    for c, word in expr.terms:
        body = '*'.join(format_atom(a, by_value) for a in word)
        if not body:
            parts.append(format_coeff(c))
        elif c == 1:
            parts.append(body)
        elif c == -1:
            parts.append(f'-{body}')
        else:
            parts.append(f'{format_coeff(c)}*{body}')
    return ' + '.join(parts)
