import re
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Sequence, Union

from lienard_sym.errors import ExprSyntaxError, UnknownSymbol
from lienard_sym.expr import MINUS_ONE, Constant, Exp, Expr, Log, NamedConstant, Neg, Power, Product, Sum, Variable

_TOKEN = re.compile(r"\s*(?:(?P<number>\d+\.\d*|\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")
FUNCTIONS = ("exp", "log")


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    """
    Split the input into number, identifier and operator tokens.

    :param text: expression text
    :return: token list, terminated by an ``end`` token
    """

    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if match is None:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[offset]!r}", offset,
                                  ("number", "identifier", "operator"))
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, var: Union[str, Sequence[str]], constants: Iterable[str]):
        self.tokens = tokenize(text)
        self.index = 0
        self.variables = (var,) if isinstance(var, str) else tuple(var)
        self.constants = set(constants)

    @property
    def token(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.token
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if self.token.text != text or self.token.kind == "end":
            raise ExprSyntaxError(f"unexpected {self._describe(self.token)}", self.token.position, (repr(text),))
        return self.advance()

    @staticmethod
    def _describe(token: Token) -> str:
        return "end of input" if token.kind == "end" else f"token {token.text!r}"

    def parse(self) -> Expr:
        result = self.expr()
        if self.token.kind != "end":
            raise ExprSyntaxError(f"unexpected {self._describe(self.token)}", self.token.position,
                                  ("'+'", "'-'", "'*'", "'/'", "end of input"))
        return result

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.token.text in ("+", "-") and self.token.kind == "op":
            op = self.advance().text
            term = self.term()
            terms.append(term if op == "+" else Neg(term))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.token.text in ("*", "/") and self.token.kind == "op":
            op = self.advance().text
            factor = self.factor()
            factors.append(factor if op == "*" else Power(factor, MINUS_ONE))
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self) -> Expr:
        negate = False
        if self.token.kind == "op" and self.token.text == "-":
            self.advance()
            negate = True
        result = self.atom()
        if self.token.kind == "op" and self.token.text == "^":
            self.advance()
            result = Power(result, self.exponent())
        return Neg(result) if negate else result

    def atom(self) -> Expr:
        token = self.token
        if token.kind == "number":
            self.advance()
            return Constant(Fraction(token.text))
        if token.kind == "ident":
            self.advance()
            if token.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Exp(arg) if token.text == "exp" else Log(arg)
            if token.text in self.variables:
                return Variable(token.text)
            if token.text in self.constants:
                return NamedConstant(token.text)
            if token.text == "e":
                return Exp(Constant(1))
            raise UnknownSymbol(token.text, token.position)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        raise ExprSyntaxError(f"unexpected {self._describe(token)}", token.position,
                              ("number", "identifier", "'('", "'exp'", "'log'"))

    def exponent(self) -> Constant:
        sign = 1
        if self.token.kind == "op" and self.token.text == "-":
            self.advance()
            sign = -1
        token = self.token
        if token.kind == "number":
            self.advance()
            return Constant(sign * Fraction(token.text))
        if token.kind == "op" and token.text == "(":
            self.advance()
            if self.token.kind == "op" and self.token.text == "-":
                self.advance()
                sign = -sign
            numerator = self._number()
            denominator = Fraction(1)
            if self.token.text != ")":
                self.expect("/")
                denominator = self._number()
            self.expect(")")
            if denominator == 0:
                raise ExprSyntaxError("zero denominator in exponent", token.position)
            return Constant(sign * numerator / denominator)
        raise ExprSyntaxError(f"unexpected {self._describe(token)}", token.position,
                              ("number", "'(' ['-'] number ['/' number] ')'"))

    def _number(self) -> Fraction:
        token = self.token
        if token.kind != "number":
            raise ExprSyntaxError(f"unexpected {self._describe(token)}", token.position, ("number",))
        self.advance()
        return Fraction(token.text)


def parse(text: str, var: Union[str, Sequence[str]] = "x", constants: Iterable[str] = ()) -> Expr:
    """
    Parse an expression over a single variable.

    The grammar has rationals, the variable, declared named constants, ``+ - * / ^`` with rational exponents,
    ``exp`` and ``log``. The identifier ``e`` reads as ``exp(1)``. Any other identifier, for instance the time
    ``t``, is rejected.

    :param text: expression text
    :param var: name of the permitted variable, or several names, default is 'x'
    :param constants: names of permitted named constants
    :return: the expression tree, not normalized
    """

    return _Parser(text, var, constants).parse()
