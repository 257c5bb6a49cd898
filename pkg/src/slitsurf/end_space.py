"""End spaces of infinite-type surfaces.

Countable compact end spaces are successor ordinals with the order topology,
written in Cantor normal form below epsilon_0.  The Cantor set and two
Cantor-plus-discrete presets cover the uncountable atoms that the
constructions use.

    >>> d = parse_descriptor("w^2+w+1")
    >>> char_system(d)
    CharSystem(alpha=Ordinal('2'), degree=1)
    >>> format_descriptor(cb_derivative(d))
    'w+2'
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterator, Optional, Tuple

__all__ = [
    "Ordinal", "ZERO", "ONE", "OMEGA", "ord_add", "ord_mul", "left_sub", "left_div_omega_power",
    "CharSystem", "GenusMarking", "EndSpaceDescriptor", "DescriptorError",
    "parse_ordinal", "parse_descriptor", "format_descriptor", "descriptor_from_char_system",
    "cb_derivative", "cb_derivative_power", "char_system", "cb_rank_degree",
    "classify_trichotomy", "realizable_isometry_groups",
    "iter_alphas", "SELF_SIMILAR", "TRANSLATABLE", "OTHER", "ANY_COUNTABLE", "VIRTUALLY_CYCLIC", "FINITE",
]


@total_ordering
class Ordinal:
    """Ordinal below epsilon_0; ``terms`` is a tuple of (exponent, coefficient)."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Tuple[Tuple["Ordinal", int], ...] = ()):
        terms = tuple(terms)
        for i, (e, c) in enumerate(terms):
            if not isinstance(e, Ordinal) or not isinstance(c, int) or c < 1:
                raise ValueError("malformed CNF term")
            if i and not e < terms[i - 1][0]:
                raise ValueError("CNF exponents must strictly decrease")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", hash(terms))

    def __setattr__(self, k, v):
        raise AttributeError("Ordinal is immutable")

    @classmethod
    def of(cls, n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("negative ordinal")
        return cls(((ZERO, n),)) if n else ZERO

    @classmethod
    def omega_power(cls, e: "Ordinal", c: int = 1) -> "Ordinal":
        return cls(((e, c),))

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        return isinstance(other, Ordinal) and self.terms == other.terms

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        for (e1, c1), (e2, c2) in zip(self.terms, other.terms):
            if e1 != e2:
                return e1 < e2
            if c1 != c2:
                return c1 < c2
        return len(self.terms) < len(other.terms)

    def __add__(self, other):
        return ord_add(self, _coerce(other))

    def __radd__(self, other):
        return ord_add(_coerce(other), self)

    def __mul__(self, other):
        return ord_mul(self, _coerce(other))

    def __rmul__(self, other):
        return ord_mul(_coerce(other), self)

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Ordinal({format_ordinal(self)!r})"

    __str__ = lambda self: format_ordinal(self)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero)

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero

    def finite_value(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def predecessor(self) -> "Ordinal":
        if not self.is_successor:
            raise ValueError(f"{self} has no predecessor")
        *head, (e, c) = self.terms
        return Ordinal(tuple(head) + (((e, c - 1),) if c > 1 else ()))

    def leading(self) -> Tuple["Ordinal", int]:
        if not self.terms:
            raise ValueError("zero has no leading term")
        return self.terms[0]

    def cnf_size(self) -> int:
        """Symbol count used to bound test grids: each term costs 1 + size(exp) + (coef - 1)."""
        return sum(1 + e.cnf_size() + (c - 1) for e, c in self.terms)

    def fundamental(self, k: int) -> "Ordinal":
        """k-th element of the canonical fundamental sequence of a limit ordinal."""
        if not self.is_limit:
            raise ValueError(f"{self} is not a limit ordinal")
        *head, (e, c) = self.terms
        prefix = Ordinal(tuple(head) + (((e, c - 1),) if c > 1 else ()))
        if e.is_successor:
            step = ord_mul(Ordinal.omega_power(e.predecessor()), Ordinal.of(k))
        else:
            step = Ordinal.omega_power(e.fundamental(k))
        return ord_add(prefix, step)


def _coerce(x) -> Ordinal:
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int):
        return Ordinal.of(x)
    raise TypeError(f"cannot treat {x!r} as an ordinal")


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def ord_add(a: Ordinal, b: Ordinal) -> Ordinal:
    if b.is_zero:
        return a
    e, c = b.terms[0]
    keep = [t for t in a.terms if t[0] > e]
    same = [t for t in a.terms if t[0] == e]
    if same:
        return Ordinal(tuple(keep) + ((e, same[0][1] + c),) + b.terms[1:])
    return Ordinal(tuple(keep) + b.terms)


def ord_mul(a: Ordinal, b: Ordinal) -> Ordinal:
    if a.is_zero or b.is_zero:
        return ZERO
    e1, c1 = a.terms[0]
    out = ZERO
    for f, d in b.terms:
        if f.is_zero:
            piece = Ordinal(((e1, c1 * d),) + a.terms[1:])
        else:
            piece = Ordinal(((ord_add(e1, f), d),))
        out = ord_add(out, piece)
    return out


def left_sub(a: Ordinal, b: Ordinal) -> Ordinal:
    """The unique x with b + x = a (requires b <= a)."""
    if a < b:
        raise ValueError(f"{b} exceeds {a}")
    i = 0
    while i < len(b.terms) and i < len(a.terms) and a.terms[i] == b.terms[i]:
        i += 1
    if i == len(b.terms):
        return Ordinal(a.terms[i:])
    (ea, ca), (eb, cb) = a.terms[i], b.terms[i]
    if eb < ea:
        return Ordinal(a.terms[i:])
    return Ordinal(((ea, ca - cb),) + a.terms[i + 1:])


def left_div_omega_power(xi: Ordinal, beta: Ordinal) -> Ordinal:
    """delta with xi = w^beta * delta + r, r < w^beta."""
    return Ordinal(tuple((left_sub(e, beta), c) for e, c in xi.terms if not e < beta))


# -- text grammar -------------------------------------------------------------

class DescriptorError(ValueError):
    """Parse or precondition failure; ``position`` is a 0-based column when known."""

    def __init__(self, msg: str, position: Optional[int] = None):
        super().__init__(msg if position is None else f"{msg} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(\d+)|(w)|(\^)|(\*)|(\+)|(\()|(\)))")


def _tokens(text: str) -> list:
    out, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise DescriptorError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastindex
        start = m.start(kind)
        val = m.group(kind)
        out.append((("num", "w", "^", "*", "+", "(", ")")[kind - 1], val, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind):
        tok = self.toks[self.i]
        if tok[0] != kind:
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise DescriptorError(f"expected {kind!r}, got {got}", tok[2])
        self.i += 1
        return tok

    def expr(self) -> Ordinal:
        total = self.term()
        while self.peek()[0] == "+":
            self.i += 1
            total = ord_add(total, self.term())
        return total

    def term(self) -> Ordinal:
        kind, val, pos = self.peek()
        if kind == "num":
            self.i += 1
            return Ordinal.of(int(val))
        if kind != "w":
            raise DescriptorError(f"expected a term, got {val or 'end of input'!r}", pos)
        self.i += 1
        exp = ONE
        if self.peek()[0] == "^":
            self.i += 1
            exp = self.atom()
        coef = 1
        if self.peek()[0] == "*":
            self.i += 1
            coef = int(self.take("num")[1])
            if coef == 0:
                return ZERO
        return Ordinal.omega_power(exp, coef)

    def atom(self) -> Ordinal:
        kind, val, pos = self.peek()
        if kind == "num":
            self.i += 1
            return Ordinal.of(int(val))
        if kind == "w":
            self.i += 1
            return OMEGA
        if kind == "(":
            self.i += 1
            inner = self.expr()
            self.take(")")
            return inner
        raise DescriptorError(f"expected exponent, got {val or 'end of input'!r}", pos)


def parse_ordinal(text: str) -> Ordinal:
    p = _Parser(text)
    out = p.expr()
    p.take("end")
    return out


def format_ordinal(a: Ordinal) -> str:
    if a.is_zero:
        return "0"
    parts = []
    for e, c in a.terms:
        if e.is_zero:
            parts.append(str(c))
            continue
        if e == ONE:
            base = "w"
        elif e.is_finite:
            base = f"w^{e.finite_value()}"
        else:
            base = f"w^({format_ordinal(e)})"
        parts.append(base if c == 1 else f"{base}*{c}")
    return "+".join(parts)


# -- descriptors ---------------------------------------------------------------

@dataclass(frozen=True)
class CharSystem:
    alpha: Ordinal
    degree: int

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")

    @property
    def rank(self) -> Ordinal:
        return ord_add(self.alpha, ONE)

    def __str__(self):
        return f"({format_ordinal(self.alpha)}, {self.degree})"


@dataclass(frozen=True)
class GenusMarking:
    """Which ends are accumulated by genus: all, none, the spine end, or listed rays."""

    kind: str = "all"
    rays: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("all", "none", "spine", "rays"):
            raise ValueError(f"unknown genus marking {self.kind!r}")
        if self.kind != "rays" and self.rays:
            raise ValueError("ray list only valid for kind 'rays'")

    @classmethod
    def parse(cls, text: str) -> "GenusMarking":
        text = text.strip().lower()
        if text.startswith("rays:"):
            body = text[5:]
            return cls("rays", tuple(sorted({int(x) for x in body.split(",") if x.strip()})))
        return cls(text)

    def __str__(self):
        return self.kind if self.kind != "rays" else "rays:" + ",".join(map(str, self.rays))


ALL = GenusMarking("all")
CANTOR_PRESETS = ("cantor", "cantor+seq", "cantor+dense")


@dataclass(frozen=True)
class EndSpaceDescriptor:
    """Pair (E, E^g).  ``atom`` is 'ordinal', 'singleton', 'empty' or a Cantor preset.

    For 'ordinal' the space is the successor ordinal ``space`` with the order
    topology, so n points is ``space = n`` and omega+1 is the convergent sequence.
    """

    atom: str
    space: Optional[Ordinal] = None
    genus: GenusMarking = field(default=ALL)

    def __post_init__(self):
        if self.atom == "ordinal":
            if self.space is None or not self.space.is_successor:
                raise DescriptorError("countable end space must be a successor ordinal (compact)")
            if self.space == ONE:
                object.__setattr__(self, "atom", "singleton")
        elif self.space is not None:
            if self.atom == "singleton" and self.space == ONE:
                pass
            else:
                raise ValueError(f"atom {self.atom!r} takes no ordinal")
        if self.atom == "singleton":
            object.__setattr__(self, "space", ONE)
        if self.atom not in ("ordinal", "singleton", "empty") + CANTOR_PRESETS:
            raise ValueError(f"unknown atom {self.atom!r}")

    @property
    def is_countable(self) -> bool:
        return self.atom in ("ordinal", "singleton", "empty")

    @property
    def is_finite(self) -> bool:
        return self.atom == "empty" or (self.is_countable and self.space.is_finite)

    def with_genus(self, genus: GenusMarking) -> "EndSpaceDescriptor":
        return EndSpaceDescriptor(self.atom, None if self.atom == "empty" else self.space, genus)


def parse_descriptor(text: str, genus: GenusMarking = ALL) -> EndSpaceDescriptor:
    """Parse ``w^A*N+...``, ``1`` or a Cantor preset name."""
    key = re.sub(r"\s+", "", text.lower())
    if key in CANTOR_PRESETS:
        return EndSpaceDescriptor(key, None, genus)
    if key == "":
        raise DescriptorError("empty descriptor", 0)
    gamma = parse_ordinal(text)
    if gamma.is_zero:
        raise DescriptorError("the empty end space is not a surface end space", 0)
    if not gamma.is_successor:
        raise DescriptorError(f"{format_ordinal(gamma)} is a limit ordinal; end spaces are compact, "
                              "write it as a successor such as '...+1'", len(text))
    return EndSpaceDescriptor("ordinal", gamma, genus)


def format_descriptor(d: EndSpaceDescriptor) -> str:
    if d.atom in CANTOR_PRESETS or d.atom == "empty":
        return d.atom
    return format_ordinal(d.space)


def descriptor_from_char_system(cs: CharSystem, genus: GenusMarking = ALL) -> EndSpaceDescriptor:
    """(0, n) is n points; otherwise w^alpha * n + 1."""
    if cs.alpha.is_zero:
        return EndSpaceDescriptor("ordinal", Ordinal.of(cs.degree), genus)
    return EndSpaceDescriptor("ordinal", ord_add(Ordinal.omega_power(cs.alpha, cs.degree), ONE), genus)


def _derived_genus(g: GenusMarking) -> GenusMarking:
    if g.kind == "rays":
        raise ValueError("a ray-list genus marking has no canonical restriction to the derived set")
    return g


def cb_derivative_power(d: EndSpaceDescriptor, beta: Ordinal) -> EndSpaceDescriptor:
    """The beta-th Cantor-Bendixson derivative.

    The points of [0, xi] surviving beta derivatives are the nonzero multiples
    w^beta * eta <= xi, i.e. eta in [1, delta] where xi = w^beta * delta + r.
    """
    if beta.is_zero:
        return d
    genus = _derived_genus(d.genus)
    if d.atom in CANTOR_PRESETS:
        # isolated points die at the first step; the Cantor part is perfect
        return EndSpaceDescriptor("cantor", None, genus)
    if d.atom == "empty":
        return d
    xi = d.space.predecessor()
    delta = left_div_omega_power(xi, beta)
    if delta.is_zero:
        return EndSpaceDescriptor("empty", None, genus)
    if delta.is_finite:
        return EndSpaceDescriptor("ordinal", delta, genus)
    return EndSpaceDescriptor("ordinal", ord_add(delta, ONE), genus)


def cb_derivative(d: EndSpaceDescriptor) -> EndSpaceDescriptor:
    return cb_derivative_power(d, ONE)


def char_system(d: EndSpaceDescriptor) -> CharSystem:
    if not d.is_countable:
        raise DescriptorError(f"{d.atom} end space is uncountable; no characteristic system")
    if d.atom == "empty":
        raise DescriptorError("empty end space has no characteristic system")
    gamma = d.space
    if gamma.is_finite:
        return CharSystem(ZERO, gamma.finite_value())
    e, c = gamma.leading()
    return CharSystem(e, c)


def cb_rank_degree(d: EndSpaceDescriptor) -> Tuple[Ordinal, int]:
    cs = char_system(d)
    return cs.rank, cs.degree


# -- classification ------------------------------------------------------------

SELF_SIMILAR = "SelfSimilar"
TRANSLATABLE = "TranslatableNotSelfSimilar"
OTHER = "Other"
ANY_COUNTABLE = "AnyCountable"
VIRTUALLY_CYCLIC = "VirtuallyCyclic"
FINITE = "Finite"


def _require_all(d: EndSpaceDescriptor) -> None:
    if d.genus.kind != "all":
        raise DescriptorError("classification is only established when every end is accumulated "
                              f"by genus (got genus marking {d.genus})")
    if d.atom == "empty":
        raise DescriptorError("empty end space")


def classify_trichotomy(d: EndSpaceDescriptor) -> str:
    _require_all(d)
    if d.atom in CANTOR_PRESETS:
        return SELF_SIMILAR
    cs = char_system(d)
    if cs.degree == 1:
        return SELF_SIMILAR
    if cs.degree == 2 and (cs.alpha.is_zero or cs.alpha.is_successor):
        return TRANSLATABLE
    return OTHER


def realizable_isometry_groups(d: EndSpaceDescriptor) -> str:
    return {SELF_SIMILAR: ANY_COUNTABLE, TRANSLATABLE: VIRTUALLY_CYCLIC, OTHER: FINITE}[
        classify_trichotomy(d)]


def iter_alphas(max_size: int) -> Iterator[Ordinal]:
    """All ordinals of CNF size <= max_size, in increasing order."""
    found = {ZERO}
    frontier = True
    while frontier:
        frontier = False
        exps = sorted(found)
        for e in exps:
            for c in range(1, max_size + 1):
                head = Ordinal.omega_power(e, c)
                for tail in sorted(found):
                    if tail.terms and not tail.terms[0][0] < e:
                        continue
                    cand = ord_add(head, tail)
                    if cand.cnf_size() <= max_size and cand not in found:
                        found.add(cand)
                        frontier = True
    yield from sorted(found)
