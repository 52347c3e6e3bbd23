"""Expression DAGs over the coordinates (x, y, t).

Maps and scalar fields are built as small expression trees with shared
subtrees. The same tree evaluates over plain complex scalars or over Jet
values; evaluation memoizes on node identity so composed words stay cheap.

Constants keep their exact type (int / Fraction) until evaluation, which is
what lets the exact polynomial kernel read coefficients off parsed input
without float noise.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction

from .errors import DomainError, EvalError, ParseError
from .jets import Jet, jet_seed

_COORDS = ("x", "y", "t")
_FUNCS = ("exp", "log", "sin", "cos", "sqrt", "conj", "re", "im")


class Expr:
    __slots__ = ("op", "args", "val")

    def __init__(self, op, args=(), val=None):
        self.op = op
        self.args = args
        self.val = val

    # arithmetic sugar; all routing goes through the smart constructors
    def __add__(self, o): return add(self, as_expr(o))
    def __radd__(self, o): return add(as_expr(o), self)
    def __sub__(self, o): return sub(self, as_expr(o))
    def __rsub__(self, o): return sub(as_expr(o), self)
    def __mul__(self, o): return mul(self, as_expr(o))
    def __rmul__(self, o): return mul(as_expr(o), self)
    def __truediv__(self, o): return div(self, as_expr(o))
    def __rtruediv__(self, o): return div(as_expr(o), self)
    def __neg__(self): return neg(self)
    def __pow__(self, n): return pow_(self, n)

    def __repr__(self):
        return f"Expr<{to_str(self)}>"


X = Expr("coord", val=0)
Y = Expr("coord", val=1)
T = Expr("coord", val=2)
ZERO = Expr("const", val=0)
ONE = Expr("const", val=1)


def const(v) -> Expr:
    if isinstance(v, Expr):
        raise EvalError("const() got an Expr")
    if v == 0:
        return ZERO
    if v == 1:
        return ONE
    return Expr("const", val=v)


def as_expr(v) -> Expr:
    return v if isinstance(v, Expr) else const(v)


def coord(i: int) -> Expr:
    return (X, Y, T)[i]


def _is_const(e: Expr) -> bool:
    return e.op == "const"


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return const(a.val + b.val)
    if _is_const(a) and a.val == 0:
        return b
    if _is_const(b) and b.val == 0:
        return a
    return Expr("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return const(a.val - b.val)
    if _is_const(b) and b.val == 0:
        return a
    if _is_const(a) and a.val == 0:
        return neg(b)
    return Expr("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return const(a.val * b.val)
    if _is_const(a):
        if a.val == 0:
            return ZERO
        if a.val == 1:
            return b
    if _is_const(b):
        if b.val == 0:
            return ZERO
        if b.val == 1:
            return a
    return Expr("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b):
        if b.val == 0:
            raise DomainError("constant division by zero in expression")
        if b.val == 1:
            return a
        if _is_const(a):
            if isinstance(a.val, (int, Fraction)) and isinstance(b.val, (int, Fraction)):
                return const(Fraction(a.val, 1) / Fraction(b.val, 1))
            return const(a.val / b.val)
    if _is_const(a) and a.val == 0:
        return ZERO
    return Expr("div", (a, b))


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return const(-a.val)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def pow_(a: Expr, n: int) -> Expr:
    if not isinstance(n, int):
        raise EvalError("expression powers must be integers")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a):
        if a.val == 0 and n < 0:
            raise DomainError("0 raised to a negative power")
        if isinstance(a.val, (int, Fraction)) and n < 0:
            return const(Fraction(a.val) ** n)
        return const(a.val ** n)
    return Expr("pow", (a,), val=n)


def _unary(op):
    def make(a: Expr) -> Expr:
        return Expr(op, (as_expr(a),))
    make.__name__ = op
    return make


exp_ = _unary("exp")
log_ = _unary("log")
sin_ = _unary("sin")
cos_ = _unary("cos")
sqrt_ = _unary("sqrt")


def conj_(a: Expr) -> Expr:
    a = as_expr(a)
    if _is_const(a):
        v = a.val
        return const(v.conjugate() if isinstance(v, complex) else v)
    if a.op == "conj":
        return a.args[0]
    return Expr("conj", (a,))


def re_(a: Expr) -> Expr:
    a = as_expr(a)
    if _is_const(a):
        v = a.val
        return const(v.real if isinstance(v, complex) else v)
    return Expr("re", (a,))


def im_(a: Expr) -> Expr:
    a = as_expr(a)
    if _is_const(a):
        v = a.val
        return const(v.imag if isinstance(v, complex) else 0)
    return Expr("im", (a,))


_I = const(1j)


# --- evaluation ------------------------------------------------------------

def _eval_scalar_unary(op: str, v: complex):
    if op == "exp":
        return cmath.exp(v)
    if op == "log":
        if v == 0 or (v.imag == 0 and v.real <= 0):
            raise DomainError(f"log of nonpositive value {v}")
        return cmath.log(v)
    if op == "sqrt":
        if v == 0 or (v.imag == 0 and v.real <= 0):
            raise DomainError(f"sqrt of nonpositive value {v}")
        return cmath.sqrt(v)
    if op == "sin":
        return cmath.sin(v)
    if op == "cos":
        return cmath.cos(v)
    if op == "conj":
        return v.conjugate()
    if op == "re":
        return complex(v.real)
    if op == "im":
        return complex(v.imag)
    raise EvalError(f"unknown unary node '{op}'")


def evaluate(e: Expr, vx, vy, vt, memo=None):
    """Evaluate over whatever algebra the seeds belong to (complex or Jet)."""
    if memo is None:
        memo = {}
    seeds = (vx, vy, vt)
    jetmode = isinstance(vx, Jet)

    def ev(node: Expr):
        key = id(node)
        got = memo.get(key)
        if got is not None:
            return got
        op = node.op
        if op == "coord":
            r = seeds[node.val]
        elif op == "const":
            r = node.val if jetmode else complex(node.val)
        elif op == "add":
            r = ev(node.args[0]) + ev(node.args[1])
        elif op == "sub":
            r = ev(node.args[0]) - ev(node.args[1])
        elif op == "mul":
            r = ev(node.args[0]) * ev(node.args[1])
        elif op == "div":
            den = ev(node.args[1])
            if not isinstance(den, Jet) and den == 0:
                raise DomainError("division by zero at a 'div' node")
            r = ev(node.args[0]) / den
        elif op == "neg":
            r = -ev(node.args[0])
        elif op == "pow":
            b = ev(node.args[0])
            if not isinstance(b, Jet) and b == 0 and node.val < 0:
                raise DomainError("zero base at a negative 'pow' node")
            r = b ** node.val
        elif op in _FUNCS:
            a = ev(node.args[0])
            if isinstance(a, Jet):
                meth = {"exp": a.exp, "log": a.log, "sin": a.sin, "cos": a.cos,
                        "sqrt": a.sqrt, "conj": a.conj, "re": a.real, "im": a.imag}[op]
                r = meth()
            else:
                r = _eval_scalar_unary(op, complex(a))
        else:
            raise EvalError(f"unknown node '{op}'")
        memo[key] = r
        return r

    return ev(e)


def eval_at(e: Expr, p) -> complex:
    """Scalar value of e at the point p = (x, y, t)."""
    return evaluate(e, complex(p[0]), complex(p[1]), complex(p[2]))


def jet_eval(e: Expr, p, order: int) -> Jet:
    jx, jy, jt = jet_seed(p, order)
    r = evaluate(e, jx, jy, jt)
    if not isinstance(r, Jet):
        r = Jet.constant(r, tuple(p), order)
    return r


def subs(e: Expr, ex: Expr, ey: Expr, et: Expr, memo=None) -> Expr:
    """Substitute expressions for the three coordinates (composition)."""
    if memo is None:
        memo = {}
    seeds = (ex, ey, et)

    def walk(node: Expr) -> Expr:
        key = id(node)
        got = memo.get(key)
        if got is not None:
            return got
        op = node.op
        if op == "coord":
            r = seeds[node.val]
        elif op == "const":
            r = node
        else:
            kids = tuple(walk(a) for a in node.args)
            r = _REBUILD[op](kids, node.val)
        memo[key] = r
        return r

    return walk(e)


_REBUILD = {
    "add": lambda k, v: add(k[0], k[1]),
    "sub": lambda k, v: sub(k[0], k[1]),
    "mul": lambda k, v: mul(k[0], k[1]),
    "div": lambda k, v: div(k[0], k[1]),
    "neg": lambda k, v: neg(k[0]),
    "pow": lambda k, v: pow_(k[0], v),
    "exp": lambda k, v: exp_(k[0]),
    "log": lambda k, v: log_(k[0]),
    "sin": lambda k, v: sin_(k[0]),
    "cos": lambda k, v: cos_(k[0]),
    "sqrt": lambda k, v: sqrt_(k[0]),
    "conj": lambda k, v: conj_(k[0]),
    "re": lambda k, v: re_(k[0]),
    "im": lambda k, v: im_(k[0]),
}


def diff(e: Expr, var: int, memo=None) -> Expr:
    """Symbolic partial derivative in coordinate var (0=x, 1=y, 2=t)."""
    if memo is None:
        memo = {}

    def d(node: Expr) -> Expr:
        key = id(node)
        got = memo.get(key)
        if got is not None:
            return got
        op = node.op
        if op == "coord":
            r = ONE if node.val == var else ZERO
        elif op == "const":
            r = ZERO
        elif op == "add":
            r = add(d(node.args[0]), d(node.args[1]))
        elif op == "sub":
            r = sub(d(node.args[0]), d(node.args[1]))
        elif op == "mul":
            a, b = node.args
            r = add(mul(d(a), b), mul(a, d(b)))
        elif op == "div":
            a, b = node.args
            r = div(sub(mul(d(a), b), mul(a, d(b))), mul(b, b))
        elif op == "neg":
            r = neg(d(node.args[0]))
        elif op == "pow":
            a, n = node.args[0], node.val
            r = mul(mul(const(n), pow_(a, n - 1)), d(a))
        elif op == "exp":
            r = mul(node, d(node.args[0]))
        elif op == "log":
            r = div(d(node.args[0]), node.args[0])
        elif op == "sqrt":
            r = div(d(node.args[0]), mul(const(2), node))
        elif op == "sin":
            r = mul(cos_(node.args[0]), d(node.args[0]))
        elif op == "cos":
            r = neg(mul(sin_(node.args[0]), d(node.args[0])))
        elif op == "conj":
            r = conj_(d(node.args[0]))
        elif op == "re":
            r = re_(d(node.args[0]))
        elif op == "im":
            r = im_(d(node.args[0]))
        else:
            raise EvalError(f"cannot differentiate node '{op}'")
        memo[key] = r
        return r

    return d(e)


# --- pretty printing (debugging and CLI error messages) ---------------------

def to_str(e: Expr) -> str:
    op = e.op
    if op == "coord":
        return _COORDS[e.val]
    if op == "const":
        return str(e.val)
    if op in ("add", "sub"):
        s = "+" if op == "add" else "-"
        return f"({to_str(e.args[0])} {s} {to_str(e.args[1])})"
    if op in ("mul", "div"):
        s = "*" if op == "mul" else "/"
        return f"({to_str(e.args[0])}{s}{to_str(e.args[1])})"
    if op == "neg":
        return f"(-{to_str(e.args[0])})"
    if op == "pow":
        return f"{to_str(e.args[0])}^{e.val}"
    return f"{op}({to_str(e.args[0])})"


# --- parser -----------------------------------------------------------------

def _tokenize(s: str):
    toks, i, n = [], 0, len(s)
    while i < n:
        c = s[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and s[i + 1].isdigit()):
            j = i
            seen_dot = seen_exp = False
            while j < n:
                cj = s[j]
                if cj.isdigit():
                    j += 1
                elif cj == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif cj in "eE" and j + 1 < n and (s[j + 1].isdigit() or s[j + 1] in "+-") \
                        and not seen_exp and j > i:
                    seen_exp = True
                    j += 2 if s[j + 1] in "+-" else 1
                else:
                    break
            text = s[i:j]
            if seen_dot or seen_exp:
                toks.append(("num", float(text)))
            else:
                toks.append(("num", int(text)))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (s[j].isalnum() or s[j] == "_"):
                j += 1
            toks.append(("name", s[i:j]))
            i = j
            continue
        if s.startswith("**", i):
            toks.append(("op", "^"))
            i += 2
            continue
        if c in "+-*/^(),":
            toks.append(("op", c))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r} at position {i} in {s!r}")
    toks.append(("end", ""))
    return toks


def parse_expr(s: str) -> Expr:
    """Parse 'x^2 + sin(t)*exp(-y)' style input into an Expr."""
    toks = _tokenize(s)
    pos = [0]

    def peek():
        return toks[pos[0]]

    def take(kind=None, value=None):
        k, v = toks[pos[0]]
        if kind is not None and k != kind or value is not None and v != value:
            raise ParseError(f"expected {value or kind}, got {v!r} in {s!r}")
        pos[0] += 1
        return v

    def parse_sum():
        e = parse_term()
        while peek() == ("op", "+") or peek() == ("op", "-"):
            op = take("op")
            rhs = parse_term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def parse_term():
        e = parse_unary()
        while peek() == ("op", "*") or peek() == ("op", "/"):
            op = take("op")
            rhs = parse_unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def parse_unary():
        if peek() == ("op", "-"):
            take("op")
            return neg(parse_unary())
        if peek() == ("op", "+"):
            take("op")
            return parse_unary()
        return parse_power()

    def parse_power():
        base = parse_atom()
        if peek() == ("op", "^"):
            take("op")
            sign = 1
            while peek() == ("op", "-"):
                take("op")
                sign = -sign
            k, v = peek()
            if k != "num" or not isinstance(v, int):
                raise ParseError(f"exponent must be an integer in {s!r}")
            take("num")
            return pow_(base, sign * v)
        return base

    def parse_atom():
        k, v = peek()
        if k == "num":
            take("num")
            return const(v)
        if k == "name":
            take("name")
            if v in _COORDS:
                return coord(_COORDS.index(v))
            if v == "pi":
                return const(math.pi)
            if v in _FUNCS:
                take("op", "(")
                inner = parse_sum()
                take("op", ")")
                return _REBUILD[v]((inner,), None)
            raise ParseError(f"unknown name {v!r} in {s!r}")
        if (k, v) == ("op", "("):
            take("op", "(")
            inner = parse_sum()
            take("op", ")")
            return inner
        raise ParseError(f"unexpected token {v!r} in {s!r}")

    e = parse_sum()
    if peek() != ("end", ""):
        raise ParseError(f"trailing input {peek()[1]!r} in {s!r}")
    return e


# --- finite-difference oracle ------------------------------------------------

_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}

_FD_STEP = {1: 1e-3, 2: 4e-3, 3: 1e-2}


def fd_oracle(e: Expr, p, alpha, h: float | None = None) -> complex:
    """Central finite differences for d^alpha e at p, |alpha| <= 3.

    Richardson-extrapolates from steps h and h/2, killing the leading h^2
    term, so the raw O(h^2) stencils come back at O(h^4).
    """
    total = sum(alpha)
    if total > 3:
        raise DomainError("fd_oracle handles |alpha| <= 3 only")
    if h is None:
        h = _FD_STEP.get(total, 1e-3)

    def estimate(step: float) -> complex:
        acc = 0j
        for o0, w0 in _STENCILS[alpha[0]]:
            for o1, w1 in _STENCILS[alpha[1]]:
                for o2, w2 in _STENCILS[alpha[2]]:
                    q = (p[0] + o0 * step, p[1] + o1 * step, p[2] + o2 * step)
                    acc += w0 * w1 * w2 * eval_at(e, q)
        return acc / step ** total

    if total == 0:
        return eval_at(e, p)
    coarse, fine = estimate(h), estimate(h / 2)
    return (4.0 * fine - coarse) / 3.0
