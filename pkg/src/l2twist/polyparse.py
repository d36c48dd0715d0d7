"""Small parser for polynomial strings accepted by the CLI.

Grammar (one page, deliberately minimal):

    poly    := term (('+' | '-') term)*
    term    := coeff? factor ('*' factor)*  |  coeff
    factor  := var ('^' int)?
    coeff   := integer or decimal literal, optional leading sign on the first term
    var     := one of x, y, z, w   (up to 4 variables)  or  z1, z2, ... zd

Implicit multiplication is allowed only between a coefficient and the
following variable ("3x^2"); variables must be separated by '*' ("x*y",
never "xy").  Exponents may be negative (Laurent monomials).  The two
naming schemes cannot be mixed within one polynomial.
"""

from __future__ import annotations

import re

from .mahler import LaurentPoly

__all__ = ["PolyParseError", "parse_poly"]

_XYZW = {"x": 0, "y": 1, "z": 2, "w": 3}

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+\.\d+|\d+|\.\d+)"
    r"|(?P<zvar>z\d+)"
    r"|(?P<var>[xyzw])"
    r"|(?P<op>[-+*^()])"
    r")"
)


class PolyParseError(ValueError):
    pass


def _tokenize(s: str):
    out = []
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise PolyParseError(f"unexpected character at position {pos}: {s[pos:pos + 8]!r}")
        if m.lastgroup is not None:
            out.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()
    return out


def parse_poly(s: str, nvars: int | None = None) -> LaurentPoly:
    """Parse a polynomial string into a LaurentPoly.

    The variable count is inferred from the highest variable used unless
    nvars pins it (needed to read "1+x" as bivariate, say).
    """
    toks = _tokenize(s)
    if not toks:
        raise PolyParseError("empty polynomial string")
    scheme = None  # 'xyzw' | 'zk'
    monomials: list[tuple[float, dict[int, int]]] = []  # (coeff, var -> exponent)
    i = 0
    n = len(toks)

    def peek():
        return toks[i] if i < n else (None, None)

    sign = 1.0
    kind, val = peek()
    if kind == "op" and val in "+-":
        sign = -1.0 if val == "-" else 1.0
        i += 1
    while True:
        # one term
        coeff = sign
        exps: dict[int, int] = {}
        kind, val = peek()
        if kind == "num":
            coeff *= float(val)
            i += 1
            kind, val = peek()
        elif kind not in ("var", "zvar"):
            raise PolyParseError("term must start with a coefficient or a variable")
        # variable factors; implicit multiplication only after the coefficient
        first_factor = True
        while True:
            kind, val = peek()
            if kind in ("var", "zvar"):
                if not first_factor:
                    raise PolyParseError(
                        "implicit multiplication between variables is not allowed; use '*'"
                    )
            elif kind == "op" and val == "*":
                i += 1
                kind, val = peek()
                if kind not in ("var", "zvar"):
                    raise PolyParseError("expected a variable after '*'")
            else:
                break
            if kind == "zvar":
                this_scheme, idx = "zk", int(val[1:]) - 1
                if idx < 0:
                    raise PolyParseError("z-variables are numbered from z1")
            else:
                this_scheme, idx = "xyzw", _XYZW[val]
            nonlocal_scheme = scheme or this_scheme
            if this_scheme != nonlocal_scheme:
                raise PolyParseError("cannot mix x,y,z,w names with z1..zd names")
            scheme = nonlocal_scheme
            i += 1
            power = 1
            kind, val = peek()
            if kind == "op" and val == "^":
                i += 1
                psign = 1
                kind, val = peek()
                if kind == "op" and val == "-":
                    psign = -1
                    i += 1
                    kind, val = peek()
                if kind != "num" or "." in val:
                    raise PolyParseError("exponent must be an integer")
                power = psign * int(val)
                i += 1
            exps[idx] = exps.get(idx, 0) + power
            first_factor = False
        monomials.append((coeff, exps))
        kind, val = peek()
        if kind is None:
            break
        if kind == "op" and val in "+-":
            sign = -1.0 if val == "-" else 1.0
            i += 1
        else:
            raise PolyParseError(f"expected '+' or '-' between terms, got {val!r}")

    used = max((idx for _, exps in monomials for idx in exps), default=-1)
    d = nvars if nvars is not None else max(used + 1, 1)
    if used >= d:
        raise PolyParseError(f"variable index {used + 1} exceeds the declared count {d}")
    terms: dict[tuple[int, ...], complex] = {}
    for coeff, exps in monomials:
        key = tuple(exps.get(l, 0) for l in range(d))
        terms[key] = terms.get(key, 0) + coeff
    return LaurentPoly(d, terms)
