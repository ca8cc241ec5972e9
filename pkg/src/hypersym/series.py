"""Truncated multivariate formal power series over exact rationals.

A :class:`MultiSeries` stores a sparse map from exponent tuples to nonzero
``Fraction`` coefficients, together with a per-variable truncation cap.  The
caps are *trusted orders*: every stored coefficient is exactly the
coefficient of the represented function, and anything beyond a cap has been
discarded.  Ring operations (add, mul, integer/rational powers) preserve
exactness at the caps; only :meth:`MultiSeries.derivative` genuinely loses
the top order of the differentiated variable and therefore reduces its cap
by one.

Per-variable caps (rather than a total-degree cap) matter because the
verification workloads pair a deformation order in one variable with an
independent inner order in the others.

:class:`PrefactorSeries` attaches a monomial prefactor with exact rational
exponents (e.g. ``y^a z^b`` for non-integer a, b) to a body series; the
product rule across body and prefactor is implemented exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .exactnum import Q, as_rational, factorial


class CapMismatch(ValueError):
    """Operands carry different variable sets or truncation caps."""


class UnknownVariable(KeyError):
    """A variable name is not part of the series."""


class NonUnitConstantTerm(ValueError):
    """Operation requires a series with constant term exactly 1."""


class NonZeroConstantTerm(ValueError):
    """Operation requires a series with constant term exactly 0."""


class PrefactorMismatch(ValueError):
    """Prefactor exponents differ where they must agree."""


def _normalize_caps(caps: Mapping[str, int]) -> tuple[tuple[str, ...], tuple[int, ...]]:
    names = tuple(sorted(caps))
    degs = tuple(int(caps[n]) for n in names)
    for n, d in zip(names, degs):
        if d < 0:
            raise ValueError(f"negative cap for variable {n!r}")
    return names, degs


class MultiSeries:
    """Sparse truncated power series; immutable by convention."""

    __slots__ = ("variables", "caps", "terms")

    def __init__(self, caps: Mapping[str, int], terms: Mapping[tuple[int, ...], Fraction] | None = None):
        self.variables, self.caps = _normalize_caps(caps)
        cleaned: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != len(self.variables):
                    raise ValueError("exponent tuple length mismatch")
                if any(e < 0 for e in exps):
                    raise ValueError("negative exponent in series term")
                if any(e > c for e, c in zip(exps, self.caps)):
                    continue
                c = as_rational(coeff)
                if c != 0:
                    cleaned[exps] = c
        self.terms = cleaned

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, caps: Mapping[str, int]) -> "MultiSeries":
        return cls(caps)

    @classmethod
    def constant(cls, value, caps: Mapping[str, int]) -> "MultiSeries":
        value = as_rational(value)
        s = cls(caps)
        if value != 0:
            s.terms[(0,) * len(s.variables)] = value
        return s

    @classmethod
    def monomial(cls, coeff, exponents: Mapping[str, int], caps: Mapping[str, int]) -> "MultiSeries":
        s = cls(caps)
        exps = [0] * len(s.variables)
        for name, e in exponents.items():
            if name not in s.variables:
                raise UnknownVariable(name)
            exps[s.variables.index(name)] = int(e)
        coeff = as_rational(coeff)
        if coeff != 0 and all(e <= c for e, c in zip(exps, s.caps)):
            s.terms[tuple(exps)] = coeff
        return s

    @classmethod
    def variable(cls, name: str, caps: Mapping[str, int]) -> "MultiSeries":
        return cls.monomial(1, {name: 1}, caps)

    # -- basic queries -----------------------------------------------------

    def cap_map(self) -> dict[str, int]:
        return dict(zip(self.variables, self.caps))

    def cap(self, v: str) -> int:
        try:
            return self.caps[self.variables.index(v)]
        except ValueError:
            raise UnknownVariable(v) from None

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.variables), Q(0))

    def coefficient(self, exponents: Mapping[str, int]) -> Fraction:
        exps = [0] * len(self.variables)
        for name, e in exponents.items():
            if name not in self.variables:
                raise UnknownVariable(name)
            exps[self.variables.index(name)] = int(e)
        return self.terms.get(tuple(exps), Q(0))

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in graded-lex order (total degree, then exponent tuple)."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.caps == other.caps
            and self.terms == other.terms
        )

    __hash__ = None

    def __repr__(self) -> str:
        caps = ", ".join(f"{v}<={c}" for v, c in zip(self.variables, self.caps))
        return f"MultiSeries[{caps}]({self.render()})"

    # -- arithmetic --------------------------------------------------------

    def _check_compatible(self, other: "MultiSeries") -> None:
        if self.variables != other.variables or self.caps != other.caps:
            raise CapMismatch(
                f"{dict(zip(self.variables, self.caps))} vs "
                f"{dict(zip(other.variables, other.caps))}"
            )

    def __add__(self, other: "MultiSeries") -> "MultiSeries":
        self._check_compatible(other)
        out = dict(self.terms)
        for exps, c in other.terms.items():
            s = out.get(exps, Q(0)) + c
            if s == 0:
                out.pop(exps, None)
            else:
                out[exps] = s
        return MultiSeries(self.cap_map(), out)

    def __neg__(self) -> "MultiSeries":
        return MultiSeries(self.cap_map(), {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiSeries") -> "MultiSeries":
        return self + (-other)

    def scale(self, k) -> "MultiSeries":
        k = as_rational(k)
        if k == 0:
            return MultiSeries.zero(self.cap_map())
        return MultiSeries(self.cap_map(), {e: c * k for e, c in self.terms.items()})

    def __mul__(self, other: "MultiSeries") -> "MultiSeries":
        self._check_compatible(other)
        caps = self.caps
        out: dict[tuple[int, ...], Fraction] = {}
        # Iterate the smaller operand outermost: sparse-friendly.
        a, b = (self.terms, other.terms) if len(self.terms) <= len(other.terms) else (other.terms, self.terms)
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                exps = tuple(i + j for i, j in zip(e1, e2))
                if any(e > c for e, c in zip(exps, caps)):
                    continue
                s = out.get(exps, Q(0)) + c1 * c2
                if s == 0:
                    out.pop(exps, None)
                else:
                    out[exps] = s
        return MultiSeries(self.cap_map(), out)

    def pow_int(self, n: int) -> "MultiSeries":
        if n < 0:
            raise ValueError("negative integer power; use pow_rational")
        out = MultiSeries.constant(1, self.cap_map())
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def shift(self, v: str, k: int = 1) -> "MultiSeries":
        """Multiply by the monomial v^k (k >= 0); overflowing terms drop."""
        if v not in self.variables:
            raise UnknownVariable(v)
        if k < 0:
            raise ValueError("negative monomial shift on a body series")
        i = self.variables.index(v)
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            e = exps[i] + k
            if e > self.caps[i]:
                continue
            out[exps[:i] + (e,) + exps[i + 1:]] = c
        return MultiSeries(self.cap_map(), out)

    def derivative(self, v: str) -> "MultiSeries":
        """Formal partial derivative; the cap of v drops by one because the
        top-order coefficient of the result would need information beyond
        the stored truncation."""
        if v not in self.variables:
            raise UnknownVariable(v)
        i = self.variables.index(v)
        caps = self.cap_map()
        caps[v] = max(caps[v] - 1, 0)
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            out[exps[:i] + (e - 1,) + exps[i + 1:]] = c * e
        return MultiSeries(caps, out)

    # -- shape changes -----------------------------------------------------

    def truncate(self, caps: Mapping[str, int]) -> "MultiSeries":
        """Restrict to (possibly lower) caps; variable set must agree."""
        names, _ = _normalize_caps(caps)
        if names != self.variables:
            raise CapMismatch("truncate cannot change the variable set")
        return MultiSeries(caps, self.terms)

    def extend(self, extra_caps: Mapping[str, int]) -> "MultiSeries":
        """Embed into a larger variable set; new variables get degree 0."""
        caps = self.cap_map()
        for name, c in extra_caps.items():
            if name in caps:
                if caps[name] != c:
                    raise CapMismatch(f"conflicting cap for {name!r}")
            else:
                caps[name] = c
        new_names = tuple(sorted(caps))
        idx = [new_names.index(v) for v in self.variables]
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            full = [0] * len(new_names)
            for pos, e in zip(idx, exps):
                full[pos] = e
            out[tuple(full)] = c
        return MultiSeries(caps, out)

    def rename(self, old: str, new: str) -> "MultiSeries":
        if old not in self.variables:
            raise UnknownVariable(old)
        if new in self.variables and new != old:
            raise ValueError(f"variable {new!r} already present")
        caps = self.cap_map()
        caps[new] = caps.pop(old)
        order_old = self.variables
        new_names = tuple(sorted(caps))
        mapping = [new_names.index(new if v == old else v) for v in order_old]
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            full = [0] * len(new_names)
            for pos, e in zip(mapping, exps):
                full[pos] = e
            out[tuple(full)] = c
        return MultiSeries(caps, out)

    # -- evaluation / rendering --------------------------------------------

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        """Exact evaluation of the truncated polynomial at rational point."""
        total = Q(0)
        vals = [as_rational(point[v]) for v in self.variables]
        for exps, c in self.terms.items():
            term = c
            for val, e in zip(vals, exps):
                if e:
                    term *= val ** e
            total += term
        return total

    def render(self) -> str:
        """Canonical text form: graded-lex term order, exact rationals."""
        if not self.terms:
            return "0"
        parts: list[str] = []
        for exps, coeff in self.sorted_terms():
            mono = "*".join(
                v if e == 1 else f"{v}^{e}"
                for v, e in zip(self.variables, exps)
                if e
            )
            mag = abs(coeff)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(("+ " if coeff > 0 else "- ") + body)
        return " ".join(parts)


def add(s1: MultiSeries, s2: MultiSeries) -> MultiSeries:
    return s1 + s2


def mul(s1: MultiSeries, s2: MultiSeries) -> MultiSeries:
    return s1 * s2


def derivative(s: MultiSeries, v: str) -> MultiSeries:
    return s.derivative(v)


def pow_rational(s: MultiSeries, gamma) -> MultiSeries:
    """Generalized binomial power (1 + u)^gamma where u = s - 1.

    Requires constant term exactly 1.  u has zero constant term, so its
    powers gain total degree and vanish past the caps; the loop stops there.
    """
    gamma = as_rational(gamma)
    if s.constant_term() != 1:
        raise NonUnitConstantTerm("pow_rational needs constant term 1")
    caps = s.cap_map()
    u = s - MultiSeries.constant(1, caps)
    out = MultiSeries.constant(1, caps)
    power = MultiSeries.constant(1, caps)
    binom = Q(1)
    k = 0
    while True:
        power = power * u
        if power.is_zero():
            break
        k += 1
        binom *= (gamma - (k - 1)) / k
        if binom == 0:
            break  # gamma is a nonnegative integer: expansion terminates
        out = out + power.scale(binom)
    return out


def exp_series(s: MultiSeries) -> MultiSeries:
    """Truncated exponential of a series with zero constant term."""
    if s.constant_term() != 0:
        raise NonZeroConstantTerm("exp_series needs zero constant term")
    caps = s.cap_map()
    out = MultiSeries.constant(1, caps)
    power = MultiSeries.constant(1, caps)
    k = 0
    while True:
        power = power * s
        if power.is_zero():
            break
        k += 1
        out = out + power.scale(Q(1, factorial(k)))
    return out


def geometric_substitute(v: str, w: str, factor: MultiSeries) -> MultiSeries:
    """The series v / factor, with the reciprocal taken geometrically.

    ``factor`` must contain both v and the deformation variable w and have
    constant term 1; the result carries factor's caps.
    """
    if v not in factor.variables:
        raise UnknownVariable(v)
    if w not in factor.variables:
        raise UnknownVariable(w)
    if factor.constant_term() != 1:
        raise NonUnitConstantTerm("geometric_substitute needs constant term 1")
    return pow_rational(factor, -1).shift(v, 1)


class PrefactorSeries:
    """A body series times a monomial with exact rational exponents.

    Integer powers of the body variables stay in the body; every exponent
    that is parameter-valued (or negative) lives in the prefactor map.
    """

    __slots__ = ("body", "prefactor")

    def __init__(self, body: MultiSeries, prefactor: Mapping[str, Fraction] | None = None):
        self.body = body
        pf: dict[str, Fraction] = {}
        if prefactor:
            for name, e in prefactor.items():
                e = as_rational(e)
                if e != 0:
                    pf[name] = e
        self.prefactor = pf

    def cap_map(self) -> dict[str, int]:
        return self.body.cap_map()

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def exponent(self, v: str) -> Fraction:
        return self.prefactor.get(v, Q(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrefactorSeries):
            return NotImplemented
        if self.body.is_zero() and other.body.is_zero():
            return True
        return self.prefactor == other.prefactor and self.body == other.body

    __hash__ = None

    def __repr__(self) -> str:
        return f"PrefactorSeries({self.render()})"

    def render(self) -> str:
        pf = "*".join(
            f"{v}^({e})" for v, e in sorted(self.prefactor.items())
        )
        return f"({self.body.render()})" + (f" * {pf}" if pf else "")

    def __add__(self, other: "PrefactorSeries") -> "PrefactorSeries":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.prefactor != other.prefactor:
            raise PrefactorMismatch(
                f"{self.prefactor} vs {other.prefactor}"
            )
        return PrefactorSeries(self.body + other.body, self.prefactor)

    def __sub__(self, other: "PrefactorSeries") -> "PrefactorSeries":
        return self + other.scale(-1)

    def scale(self, k) -> "PrefactorSeries":
        return PrefactorSeries(self.body.scale(k), self.prefactor)

    def truncate(self, caps: Mapping[str, int]) -> "PrefactorSeries":
        return PrefactorSeries(self.body.truncate(caps), self.prefactor)

    def multiply_prefactor(self, v: str, k) -> "PrefactorSeries":
        """Absorb a factor v^k into the prefactor exponent (k exact rational)."""
        pf = dict(self.prefactor)
        pf[v] = pf.get(v, Q(0)) + as_rational(k)
        return PrefactorSeries(self.body, pf)

    def multiply_monomial(self, v: str, k: int) -> "PrefactorSeries":
        """Multiply by v^k, keeping it in the body when that stays polynomial."""
        if k == 0:
            return self
        if v in self.body.variables and v not in self.prefactor and k > 0:
            return PrefactorSeries(self.body.shift(v, k), self.prefactor)
        return self.multiply_prefactor(v, k)

    def derivative(self, v: str) -> "PrefactorSeries":
        """d/dv of body * v^alpha.

        For alpha = 0 this is the plain body derivative (cap of v drops by
        one).  For alpha != 0 the identity
        d/dv (S * v^alpha) = (v dS/dv + alpha S) * v^(alpha-1)
        updates each body coefficient in place by (e_v + alpha), which loses
        no orders at all.
        """
        alpha = self.prefactor.get(v)
        if alpha is None:
            if v not in self.body.variables:
                raise UnknownVariable(v)
            return PrefactorSeries(self.body.derivative(v), self.prefactor)
        pf = dict(self.prefactor)
        if alpha == 1:
            pf.pop(v)
        else:
            pf[v] = alpha - 1
        if v in self.body.variables:
            i = self.body.variables.index(v)
            terms = {
                exps: c * (exps[i] + alpha)
                for exps, c in self.body.terms.items()
                if exps[i] + alpha != 0
            }
            body = MultiSeries(self.body.cap_map(), terms)
        else:
            body = self.body.scale(alpha)
        return PrefactorSeries(body, pf)


def prefactor_multiply(p: PrefactorSeries, v: str, k) -> PrefactorSeries:
    return p.multiply_prefactor(v, k)


def prefactor_derivative(p: PrefactorSeries, v: str) -> PrefactorSeries:
    return p.derivative(v)
