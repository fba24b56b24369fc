"""Scalar expression language for chart functions.

Grammar (whitespace insignificant):

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" factor)?
    unary  := "-" unary | atom
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

so ^ binds tighter than unary minus, which binds tighter than * and /.  The
exponent of ^ must fold to a constant; that keeps jets single-valued on the
whole domain.  Known function names: sin cos tan sqrt exp ln.

AST nodes are plain tuples:

    ("num", value)  ("var", name)  ("neg", a)  ("fun", fname, a)
    ("add"|"sub"|"mul"|"div", a, b)  ("pow", base, exponent_value)
"""
import math
import re

import numpy as np

from . import jetcore as jc

FUNCTIONS = ("sin", "cos", "tan", "sqrt", "exp", "ln")

_TOKEN_RE = re.compile(
    r"(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


class ExprError(ValueError):
    """Parse or identifier failure; carries the byte offset into the source."""

    def __init__(self, message, source=None, offset=None):
        if offset is not None:
            message = f"{message} at offset {offset}"
        if source is not None:
            message = f"{message} in {source!r}"
        super().__init__(message)
        self.source = source
        self.offset = offset


class DomainError(ArithmeticError):
    """Evaluation left the function's domain; names the subexpression."""

    def __init__(self, node, reason, point=None):
        msg = f"domain error in '{to_source(node)}': {reason}"
        if point is not None:
            msg = f"{msg} at point {tuple(round(float(c), 12) for c in point)}"
        super().__init__(msg)
        self.node = node
        self.point = None if point is None else tuple(float(c) for c in point)


def _tokenize(source):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprError(f"unexpected character {source[pos]!r}", source, pos)
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group()), pos))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group(), pos))
        else:
            tokens.append((m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, source, chart):
        self.source = source
        self.chart = None if chart is None else tuple(chart)
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        kind, value, offset = self.peek()
        got = "end of input" if kind == "end" else repr(str(value))
        raise ExprError(f"expected {expected}, got {got}", self.source, offset)

    def expect(self, kind, expected):
        if self.peek()[0] != kind:
            self.fail(expected)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("'+', '-', '*', '/', '^' or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = ("mul" if op == "*" else "div", node, self.factor())
        return node

    def factor(self):
        if self.peek()[0] == "-":
            self.advance()
            return ("neg", self.factor())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[0] == "^":
            _, _, caret = self.advance()
            exponent = self.factor()
            value = _fold_constant(exponent)
            if value is None:
                raise ExprError("exponent of '^' must be constant", self.source, caret)
            node = ("pow", node, value)
        return node

    def atom(self):
        kind, value, offset = self.peek()
        if kind == "num":
            self.advance()
            return ("num", value)
        if kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")", "')'")
            return node
        if kind == "name":
            self.advance()
            if value in FUNCTIONS:
                self.expect("(", f"'(' after function {value!r}")
                node = self.expr()
                self.expect(")", "')'")
                return ("fun", value, node)
            if self.chart is not None and value not in self.chart:
                raise ExprError(
                    f"unknown identifier {value!r} (chart: {', '.join(self.chart)})",
                    self.source,
                    offset,
                )
            return ("var", value)
        self.fail("NUMBER, IDENT, '-' or '('")


def _fold_constant(node):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "neg":
        v = _fold_constant(node[1])
        return None if v is None else -v
    if tag in ("add", "sub", "mul", "div"):
        a = _fold_constant(node[1])
        b = _fold_constant(node[2])
        if a is None or b is None:
            return None
        if tag == "add":
            return a + b
        if tag == "sub":
            return a - b
        if tag == "mul":
            return a * b
        return a / b
    if tag == "pow":
        a = _fold_constant(node[1])
        return None if a is None else a ** node[2]
    if tag == "fun":
        a = _fold_constant(node[2])
        if a is None:
            return None
        return {"sin": math.sin, "cos": math.cos, "tan": math.tan,
                "sqrt": math.sqrt, "exp": math.exp, "ln": math.log}[node[1]](a)
    return None


def parse_expression(source, chart=None):
    """Parse ``source`` into an AST; identifiers must belong to ``chart``."""
    if not isinstance(source, str) or not source.strip():
        raise ExprError("empty expression", source, 0)
    return _Parser(source, chart).parse()


_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _prec(node):
    return _PREC.get(node[0], 5)


def _fmt_num(value):
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def to_source(node):
    """Canonical printing; parse(to_source(parse(s))) is structure-identical."""
    tag = node[0]
    if tag == "num":
        return _fmt_num(node[1])
    if tag == "var":
        return node[1]
    if tag == "fun":
        return f"{node[1]}({to_source(node[2])})"
    if tag == "neg":
        child = to_source(node[1])
        if _prec(node[1]) < 3:
            child = f"({child})"
        return f"-{child}"
    if tag == "pow":
        base = to_source(node[1])
        if _prec(node[1]) < 5:
            base = f"({base})"
        return f"{base}^{_fmt_num(node[2])}"
    a, b = node[1], node[2]
    left = to_source(a)
    right = to_source(b)
    own = _PREC[tag]
    if _prec(a) < own:
        left = f"({left})"
    # the right operand needs parentheses at equal precedence to preserve
    # left-association of the printed form
    if _prec(b) <= own:
        right = f"({right})"
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[tag]
    return f"{left}{op}{right}"


def free_variables(node):
    tag = node[0]
    if tag == "var":
        return {node[1]}
    if tag == "num":
        return set()
    if tag == "fun":
        return free_variables(node[2])
    if tag == "neg":
        return free_variables(node[1])
    if tag == "pow":
        return free_variables(node[1])
    return free_variables(node[1]) | free_variables(node[2])


def _as_points(point, nvars):
    pts = np.asarray(point, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != nvars:
        raise ValueError(f"expected points of dimension {nvars}, got shape {pts.shape}")
    return pts


def _first_bad(mask, points):
    idx = int(np.argmax(mask))
    return points[idx]


def evaluate_values(expr, point, chart):
    """Plain numeric evaluation, same domain rules as the jet evaluator."""
    pts = _as_points(point, len(chart))
    cols = {name: i for i, name in enumerate(chart)}
    return _eval_values(expr, pts, cols)


def _eval_values(node, pts, cols):
    tag = node[0]
    if tag == "num":
        return np.full(pts.shape[0], node[1])
    if tag == "var":
        return pts[:, cols[node[1]]].copy()
    if tag == "neg":
        return -_eval_values(node[1], pts, cols)
    if tag in ("add", "sub", "mul", "div"):
        a = _eval_values(node[1], pts, cols)
        b = _eval_values(node[2], pts, cols)
        if tag == "add":
            return a + b
        if tag == "sub":
            return a - b
        if tag == "mul":
            return a * b
        bad = b == 0.0
        if bad.any():
            raise DomainError(node, "division by zero", _first_bad(bad, pts))
        return a / b
    if tag == "pow":
        a = _eval_values(node[1], pts, cols)
        _check_pow_domain(node, a, node[2], pts)
        return np.power(a, node[2])
    a = _eval_values(node[2], pts, cols)
    fname = node[1]
    if fname == "ln":
        bad = a <= 0.0
        if bad.any():
            raise DomainError(node, "logarithm of a non-positive value", _first_bad(bad, pts))
        return np.log(a)
    if fname == "sqrt":
        bad = a < 0.0
        if bad.any():
            raise DomainError(node, "square root of a negative value", _first_bad(bad, pts))
        return np.sqrt(a)
    if fname == "tan":
        out = np.tan(a)
        bad = ~np.isfinite(out)
        if bad.any():
            raise DomainError(node, "tangent pole", _first_bad(bad, pts))
        return out
    return {"sin": np.sin, "cos": np.cos, "exp": np.exp}[fname](a)


def _check_pow_domain(node, base, q, pts):
    if q == round(q):
        if q < 0:
            bad = base == 0.0
            if bad.any():
                raise DomainError(node, "zero base with negative exponent", _first_bad(bad, pts))
    else:
        bad = base <= 0.0
        if bad.any():
            raise DomainError(
                node, "non-positive base with non-integer exponent", _first_bad(bad, pts)
            )


def jet_coefficients(expr, space, point, chart):
    """Taylor coefficients of ``expr`` at each point; shape (npts, ncoef)."""
    pts = _as_points(point, len(chart))
    cols = {name: i for i, name in enumerate(chart)}
    return _eval_jet(expr, space, pts, cols)


def evaluate_jet(expr, point, chart, order=3):
    """Jet of ``expr`` at a single chart point."""
    space = jc.jet_space(len(chart), order)
    coeffs = jet_coefficients(expr, space, point, chart)
    return jc.Jet(space, coeffs[0])


def _eval_jet(node, space, pts, cols):
    tag = node[0]
    if tag == "num":
        return jc.constant(space, node[1], pts.shape[0])
    if tag == "var":
        return jc.variable(space, cols[node[1]], pts[:, cols[node[1]]])
    if tag == "neg":
        return -_eval_jet(node[1], space, pts, cols)
    if tag in ("add", "sub"):
        a = _eval_jet(node[1], space, pts, cols)
        b = _eval_jet(node[2], space, pts, cols)
        return a + b if tag == "add" else a - b
    if tag == "mul":
        a = _eval_jet(node[1], space, pts, cols)
        b = _eval_jet(node[2], space, pts, cols)
        return jc.mul(space, a, b)
    if tag == "div":
        a = _eval_jet(node[1], space, pts, cols)
        b = _eval_jet(node[2], space, pts, cols)
        c = b[:, 0]
        bad = c == 0.0
        if bad.any():
            raise DomainError(node, "division by zero", _first_bad(bad, pts))
        inv = jc.compose(space, b, 1.0 / c, -1.0 / c**2, 2.0 / c**3, -6.0 / c**4)
        return jc.mul(space, a, inv)
    if tag == "pow":
        a = _eval_jet(node[1], space, pts, cols)
        return _pow_jet(node, space, a, node[2], pts)
    a = _eval_jet(node[2], space, pts, cols)
    c = a[:, 0]
    fname = node[1]
    if fname == "sin":
        s, co = np.sin(c), np.cos(c)
        return jc.compose(space, a, s, co, -s, -co)
    if fname == "cos":
        s, co = np.sin(c), np.cos(c)
        return jc.compose(space, a, co, -s, -co, s)
    if fname == "tan":
        t = np.tan(c)
        if not np.isfinite(t).all():
            raise DomainError(node, "tangent pole", _first_bad(~np.isfinite(t), pts))
        sec2 = 1.0 + t * t
        return jc.compose(space, a, t, sec2, 2.0 * t * sec2, 2.0 * sec2 * sec2 + 4.0 * t * t * sec2)
    if fname == "exp":
        e = np.exp(c)
        return jc.compose(space, a, e, e, e, e)
    if fname == "ln":
        bad = c <= 0.0
        if bad.any():
            raise DomainError(node, "logarithm of a non-positive value", _first_bad(bad, pts))
        return jc.compose(space, a, np.log(c), 1.0 / c, -1.0 / c**2, 2.0 / c**3)
    # sqrt
    bad = c <= 0.0
    if bad.any():
        raise DomainError(node, "square root of a non-positive value", _first_bad(bad, pts))
    r = np.sqrt(c)
    return jc.compose(space, a, r, 0.5 / r, -0.25 / (c * r), 0.375 / (c * c * r))


def _pow_jet(node, space, base, q, pts):
    c = base[:, 0]
    _check_pow_domain(node, c, q, pts)
    derivs = []
    falling = 1.0
    for k in range(4):
        if falling == 0.0:
            # the falling factorial kills the term; skipping the power also
            # avoids 0 * inf at zero bases with small integer exponents
            derivs.append(np.zeros_like(c))
        else:
            derivs.append(falling * np.power(c, q - k))
        falling *= q - k
    return jc.compose(space, base, *derivs)


def finite_difference_jet(expr, point, chart, order=3, step=1e-5):
    """Central-difference jet estimate; test oracle only."""
    if step <= 0:
        raise ValueError("step must be positive")
    space = jc.jet_space(len(chart), order)
    coeffs = fd_coefficients(expr, space, point, chart, step)
    return jc.Jet(space, coeffs[0])


def fd_coefficients(expr, space, point, chart, step):
    pts = _as_points(point, len(chart))
    cols = {name: i for i, name in enumerate(chart)}
    out = np.empty((pts.shape[0], space.ncoef))
    for r, alpha in enumerate(space.alphas):
        seq = [v for v, k in enumerate(alpha) for _ in range(k)]
        est = _fd_apply(expr, pts, cols, seq, step)
        out[:, r] = est / space.alpha_factorials[r]
    return out


def _fd_apply(expr, pts, cols, seq, step):
    if not seq:
        return _eval_values(expr, pts, cols)
    v = seq[0]
    plus = pts.copy()
    plus[:, v] += step
    minus = pts.copy()
    minus[:, v] -= step
    hi = _fd_apply(expr, plus, cols, seq[1:], step)
    lo = _fd_apply(expr, minus, cols, seq[1:], step)
    return (hi - lo) / (2.0 * step)
