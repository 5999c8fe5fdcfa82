"""Independent symbolic reference for brackets on R^3, written directly in sympy.

Used only to cross-check the polynomial engine; shares no code with it.
"""

from __future__ import annotations

import sympy as sp

X = sp.symbols("x1 x2 x3")


def to_sympy(p) -> sp.Expr:
    """Convert a dirackit ``Poly`` in three variables."""
    out = sp.Integer(0)
    for e, c in p.terms.items():
        term = sp.Float(c, 30)
        for v, k in zip(X, e):
            term *= v**k
        out += term
    return sp.expand(out)


def lie(X1, X2):
    return [sp.expand(sum(X1[j] * sp.diff(X2[i], X[j]) - X2[j] * sp.diff(X1[i], X[j]) for j in range(3)))
            for i in range(3)]


def d0(f):
    return [sp.diff(f, v) for v in X]


def contract(a, v):
    return sp.expand(sum(ai * vi for ai, vi in zip(a, v)))


def lie_one_form(v, a):
    """Cartan: L_v a = d(a(v)) + i_v da."""
    da = [[sp.diff(a[j], X[i]) - sp.diff(a[i], X[j]) for j in range(3)] for i in range(3)]
    iv = [sum(v[i] * da[i][j] for i in range(3)) for j in range(3)]
    return [sp.expand(g + h) for g, h in zip(d0(contract(a, v)), iv)]


def courant(a, b):
    (r, al), (s, be) = a, b
    corr = d0(sp.Rational(1, 2) * (contract(al, s) - contract(be, r)))
    form = [sp.expand(u - w + c) for u, w, c in zip(lie_one_form(r, be), lie_one_form(s, al), corr)]
    return lie(r, s), form


def big_pair(a, b):
    return sp.expand(contract(a[1], b[0]) + contract(b[1], a[0]))


def tensor(a1, a2, a3):
    return big_pair(courant(a1, a2), a3)


def pair_to_sympy(p):
    """Convert a dirackit ``Pair`` to ``([X^i], [alpha_i])``."""
    return ([to_sympy(c) for c in p.vec.components()], [to_sympy(c) for c in p.form.components()])


def max_coeff(expr) -> float:
    expr = sp.expand(expr)
    if expr == 0:
        return 0.0
    return max(abs(float(c)) for c in sp.Poly(expr, *X).coeffs())
