"""Expression mini-language: parser, printer, evaluator, symbolic derivative.

Scalar formulas entering system definitions (densities, primitives, eta,
Hamiltonians) are written in a small fixed language over the variables
x1, x2, x3 (3-D fields) and u (one-variable fields), with operators
+ - * / ^ (right-associative ^, binding tighter than unary minus), and
the functions exp, ln, sin, cos, sqrt, abs, sign.

Semantics are IEEE double; any evaluation that leaves the real domain or
produces a non-finite value raises DomainEvalError.  sign(0) is declared
undefined (it backs the derivative of abs, which has no value at 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DomainEvalError,
    ParseError,
    UnboundVariableError,
    UnknownIdentifierError,
)

VARIABLES = ("x1", "x2", "x3", "u")
FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt", "abs", "sign")


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Lit(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


def lit(v: float) -> Lit:
    return Lit(float(v))


def var(name: str) -> Var:
    if name not in VARIABLES:
        raise ValueError(f"unknown variable {name!r}")
    return Var(name)


def add(a: Expr, b: Expr) -> Bin:
    return Bin("+", a, b)


def sub(a: Expr, b: Expr) -> Bin:
    return Bin("-", a, b)


def mul(a: Expr, b: Expr) -> Bin:
    return Bin("*", a, b)


def div(a: Expr, b: Expr) -> Bin:
    return Bin("/", a, b)


def pow_(a: Expr, b: Expr) -> Bin:
    return Bin("^", a, b)


def neg(a: Expr) -> Neg:
    return Neg(a)


def call(fn: str, a: Expr) -> Call:
    if fn not in FUNCTIONS:
        raise ValueError(f"unknown function {fn!r}")
    return Call(fn, a)


# --------------------------------------------------------------------------
# Scalar primitives with explicit domain semantics


def _sign(v: float) -> float:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    raise DomainEvalError("sign(0) is undefined")


def _pow(a: float, b: float) -> float:
    # negative base with non-integer exponent would be complex; refuse it
    # rather than let it turn into NaN downstream
    if a < 0.0 and not float(b).is_integer():
        raise DomainEvalError(f"negative base {a!r} with non-integer exponent {b!r}")
    return math.pow(a, b)


def _ln(v: float) -> float:
    if v <= 0.0:
        raise DomainEvalError(f"ln of non-positive value {v!r}")
    return math.log(v)


def _sqrt(v: float) -> float:
    if v < 0.0:
        raise DomainEvalError(f"sqrt of negative value {v!r}")
    return math.sqrt(v)


_FN_IMPL = {
    "exp": math.exp,
    "ln": _ln,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": _sqrt,
    "abs": abs,
    "sign": _sign,
}


# --------------------------------------------------------------------------
# Tokenizer / parser

_OPS = set("+-*/^()")


def _tokenize(source: str):
    tokens = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c in _OPS:
            tokens.append((c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ParseError(f"bad numeric literal {text!r}", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("ident", source[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


def _fold_unary(node: Expr) -> Expr:
    if isinstance(node, Neg) and isinstance(node.operand, Lit):
        return Lit(-node.operand.value)
    if isinstance(node, Call) and isinstance(node.arg, Lit):
        try:
            v = _FN_IMPL[node.fn](node.arg.value)
        except (DomainEvalError, ValueError, OverflowError):
            return node
        return Lit(v) if math.isfinite(v) else node
    return node


def _fold_bin(node: Expr) -> Expr:
    if isinstance(node, Bin) and isinstance(node.left, Lit) and isinstance(node.right, Lit):
        try:
            v = _apply_bin(node.op, node.left.value, node.right.value)
        except (DomainEvalError, ValueError, OverflowError, ZeroDivisionError):
            return node
        return Lit(v) if math.isfinite(v) else node
    return node


def _apply_bin(op: str, a: float, b: float) -> float:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    return _pow(a, b)


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse_sum(self) -> Expr:
        node = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = _fold_bin(Bin(op, node, self.parse_term()))
        return node

    def parse_term(self) -> Expr:
        node = self.parse_unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = _fold_bin(Bin(op, node, self.parse_unary()))
        return node

    def parse_unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return _fold_unary(Neg(self.parse_unary()))
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.peek()[0] == "^":
            self.advance()
            # exponent at unary level gives right associativity: 2^3^2 = 512
            return _fold_bin(Bin("^", base, self.parse_unary()))
        return base

    def parse_atom(self) -> Expr:
        kind, value, offset = self.advance()
        if kind == "num":
            return Lit(value)
        if kind == "(":
            node = self.parse_sum()
            self.expect(")")
            return node
        if kind == "ident":
            if self.peek()[0] == "(":
                if value not in FUNCTIONS:
                    raise UnknownIdentifierError(f"unknown function {value!r}", offset)
                self.advance()
                argument = self.parse_sum()
                self.expect(")")
                return _fold_unary(Call(value, argument))
            if value not in VARIABLES:
                raise UnknownIdentifierError(f"unknown identifier {value!r}", offset)
            return Var(value)
        raise ParseError(f"expected a value, found {value!r}" if value else "unexpected end of input", offset)


def parse(source: str) -> Expr:
    """Parse source text into an expression tree.

    Literal-only subtrees are constant-folded when this keeps the value
    finite and defined, so parse(print(parse(s))) == parse(s) holds with
    tree equality for every valid input s.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    parser = _Parser(_tokenize(source))
    node = parser.parse_sum()
    kind, value, offset = parser.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {value!r}", offset)
    return node


# --------------------------------------------------------------------------
# Printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5
_BIN_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _BIN_PREC[e.op]
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Lit) and math.copysign(1.0, e.value) < 0:
        # negative literals print with a leading minus and must be guarded
        # like a unary expression
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(e: Expr, need_parens: bool) -> str:
    s = to_source(e)
    return f"({s})" if need_parens else s


def to_source(e: Expr) -> str:
    """Render a tree to parseable text with minimal parentheses."""
    if isinstance(e, Lit):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _prec(e.operand) < _PREC_NEG)
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.arg)})"
    if isinstance(e, Bin):
        p = _BIN_PREC[e.op]
        if e.op == "^":
            # right-associative; the exponent reparses at unary level
            left = _wrap(e.left, _prec(e.left) <= p)
            right = _wrap(e.right, _prec(e.right) < _PREC_NEG)
        else:
            left = _wrap(e.left, _prec(e.left) < p)
            right = _wrap(e.right, _prec(e.right) <= p)
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# Evaluation


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_vars(e.operand)
    if isinstance(e, Call):
        return free_vars(e.arg)
    if isinstance(e, Bin):
        return free_vars(e.left) | free_vars(e.right)
    return set()


def eval_expr(e: Expr, env: dict[str, float]) -> float:
    """Reference tree-walking evaluator (compile_expr is the fast path)."""
    v = _eval(e, env)
    if not math.isfinite(v):
        raise DomainEvalError(f"non-finite result {v!r}")
    return v


def _eval(e: Expr, env) -> float:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundVariableError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, Call):
        try:
            v = _FN_IMPL[e.fn](_eval(e.arg, env))
        except (ValueError, OverflowError) as exc:
            raise DomainEvalError(str(exc)) from None
        return v
    a = _eval(e.left, env)
    b = _eval(e.right, env)
    try:
        v = _apply_bin(e.op, a, b)
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise DomainEvalError(str(exc)) from None
    if not math.isfinite(v):
        raise DomainEvalError(f"non-finite intermediate {v!r}")
    return v


_COMPILE_NS = {
    "exp": math.exp,
    "ln": _ln,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": _sqrt,
    "_abs": abs,
    "sign": _sign,
    "_pow": _pow,
    "__builtins__": {},
}

_CALL_SRC = {
    "exp": "exp",
    "ln": "ln",
    "sin": "sin",
    "cos": "cos",
    "sqrt": "sqrt",
    "abs": "_abs",
    "sign": "sign",
}


def _gen(e: Expr) -> str:
    if isinstance(e, Lit):
        return f"({e.value!r})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{_gen(e.operand)})"
    if isinstance(e, Call):
        return f"{_CALL_SRC[e.fn]}({_gen(e.arg)})"
    if e.op == "^":
        return f"_pow({_gen(e.left)}, {_gen(e.right)})"
    return f"({_gen(e.left)} {e.op} {_gen(e.right)})"


def compile_expr(e: Expr, varnames: tuple[str, ...] = ("x1", "x2", "x3")):
    """Compile a tree into a fast positional callable f(*varnames).

    The callable raises DomainEvalError on out-of-domain input or any
    non-finite result, and UnboundVariableError if the tree references a
    variable outside varnames.
    """
    missing = free_vars(e) - set(varnames)
    if missing:
        raise UnboundVariableError(f"variables {sorted(missing)} not provided by {varnames}")
    src = _gen(e)
    raw = eval(f"lambda {', '.join(varnames)}: {src}", dict(_COMPILE_NS))

    def fn(*args: float) -> float:
        try:
            v = raw(*args)
        except DomainEvalError:
            raise
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise DomainEvalError(str(exc)) from None
        if not math.isfinite(v):
            raise DomainEvalError(f"non-finite result {v!r}")
        return v

    fn.source = src
    fn.varnames = varnames
    return fn


# --------------------------------------------------------------------------
# Symbolic differentiation

# Tidying constructors fold literal-literal operations and drop exact
# identities (x+0, 1*x, x/1, x^1).  Multiplication by a literal zero is
# deliberately kept: 0 * sign(f) must still fault at f = 0.


def _s_add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Lit) and a.value == 0.0:
        return b
    if isinstance(b, Lit) and b.value == 0.0:
        return a
    return _fold_bin(Bin("+", a, b))


def _s_sub(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Lit) and b.value == 0.0:
        return a
    if isinstance(a, Lit) and a.value == 0.0:
        return _fold_unary(Neg(b))
    return _fold_bin(Bin("-", a, b))


def _s_mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Lit) and a.value == 1.0:
        return b
    if isinstance(b, Lit) and b.value == 1.0:
        return a
    return _fold_bin(Bin("*", a, b))


def _s_div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Lit) and b.value == 1.0:
        return a
    return _fold_bin(Bin("/", a, b))


def _s_pow(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Lit) and b.value == 1.0:
        return a
    return _fold_bin(Bin("^", a, b))


def differentiate(e: Expr, name: str) -> Expr:
    """Symbolic partial derivative with respect to one variable.

    The derivative of abs is sign, and the derivative of sign is a zero
    that still evaluates sign; both therefore raise DomainEvalError when
    evaluated at an argument of exactly 0, where no derivative exists.
    """
    if name not in VARIABLES:
        raise ValueError(f"unknown variable {name!r}")
    return _diff(e, name)


def _diff(e: Expr, name: str) -> Expr:
    if isinstance(e, Lit):
        return Lit(0.0)
    if isinstance(e, Var):
        return Lit(1.0) if e.name == name else Lit(0.0)
    if isinstance(e, Neg):
        return _fold_unary(Neg(_diff(e.operand, name)))
    if isinstance(e, Call):
        inner = _diff(e.arg, name)
        if e.fn == "exp":
            outer = Call("exp", e.arg)
        elif e.fn == "ln":
            return _s_div(inner, e.arg)
        elif e.fn == "sin":
            outer = Call("cos", e.arg)
        elif e.fn == "cos":
            outer = _fold_unary(Neg(Call("sin", e.arg)))
        elif e.fn == "sqrt":
            return _s_div(inner, _s_mul(Lit(2.0), Call("sqrt", e.arg)))
        elif e.fn == "abs":
            outer = Call("sign", e.arg)
        else:  # sign: zero away from 0, undefined at 0
            outer = _s_mul(Lit(0.0), Call("sign", e.arg))
        return _s_mul(outer, inner)
    if e.op == "+":
        return _s_add(_diff(e.left, name), _diff(e.right, name))
    if e.op == "-":
        return _s_sub(_diff(e.left, name), _diff(e.right, name))
    if e.op == "*":
        return _s_add(
            _s_mul(_diff(e.left, name), e.right),
            _s_mul(e.left, _diff(e.right, name)),
        )
    if e.op == "/":
        da = _diff(e.left, name)
        db = _diff(e.right, name)
        num = _s_sub(_s_mul(da, e.right), _s_mul(e.left, db))
        return _s_div(num, _s_pow(e.right, Lit(2.0)))
    # power rule for a literal exponent, general formula otherwise
    da = _diff(e.left, name)
    db = _diff(e.right, name)
    if isinstance(e.right, Lit):
        c = e.right.value
        return _s_mul(_s_mul(Lit(c), _s_pow(e.left, Lit(c - 1.0))), da)
    general = _s_add(
        _s_mul(db, Call("ln", e.left)),
        _s_div(_s_mul(e.right, da), e.left),
    )
    return _s_mul(Bin("^", e.left, e.right), general)


# --------------------------------------------------------------------------
# Substitution


def substitute(e: Expr, name: str, replacement: Expr) -> Expr:
    """Replace every occurrence of one variable with another expression."""
    if isinstance(e, Var):
        return replacement if e.name == name else e
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, name, replacement))
    if isinstance(e, Call):
        return Call(e.fn, substitute(e.arg, name, replacement))
    if isinstance(e, Bin):
        return Bin(e.op, substitute(e.left, name, replacement), substitute(e.right, name, replacement))
    return e
