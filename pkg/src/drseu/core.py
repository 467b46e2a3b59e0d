"""Primitive objects for state-dependent random expected utility.

Acts map objective states to lotteries; lotteries live over consequences,
which are either prizes (terminal) or (prize, continuation-menu) pairs.
All probabilities and utility values are exact rationals; equality of
objects is structural equality of their canonical forms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from ._rat import ONE, ZERO, RatLike, convex_combination, rat, rat_str


# ---------------------------------------------------------------------------
# errors


class DrseuError(Exception):
    """Base class for package errors."""


class ShapeError(DrseuError, ValueError):
    """Dimension mismatch between acts, beliefs, or state spaces."""


class DomainError(DrseuError, ValueError):
    """An object was queried outside its domain (act not in menu, etc.)."""


class InvariantError(DrseuError, ValueError):
    """A constructor invariant failed."""


class PreconditionError(DrseuError, ValueError):
    """An operation's stated precondition does not hold."""


class CoverageError(DrseuError, LookupError):
    """A probe asked an oracle about a menu it cannot answer."""


class ConditioningError(DrseuError, ValueError):
    """Conditioning on a zero-probability or malformed history."""


class UndefinedConditionalError(DrseuError, ValueError):
    """Conditional of a choice distribution with zero marginal."""


class SupportMismatchError(DrseuError, ValueError):
    """Observed choice cannot be rationalized by any candidate."""


class InstanceError(DrseuError, ValueError):
    """An axiom-check instance does not satisfy the axiom's hypothesis."""


class ClassError(DrseuError, TypeError):
    """Operation applied to a model outside its declared class."""


class DataInconsistencyError(DrseuError, ValueError):
    """Probed data contradict the structure being recovered."""


class DegenerateConsumptionError(DrseuError, ValueError):
    """Consumption lotteries cannot separate tastes (Condition-1 failure)."""


class ModelMisfitError(DrseuError, ValueError):
    """A parametric family cannot fit the probed values."""


class ParseError(DrseuError, ValueError):
    """Malformed model or dataset file."""


class SchemaError(DrseuError, ValueError):
    """Well-formed file with missing or contradictory fields."""


# ---------------------------------------------------------------------------
# label spaces


@dataclass(frozen=True)
class PrizeSpace:
    """Finite set of prize labels."""

    labels: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise InvariantError("prize space is empty")
        if len(set(self.labels)) != len(self.labels):
            raise InvariantError("duplicate prize labels")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown prize {label!r}") from None


@dataclass(frozen=True)
class StateSpace:
    """Finite set of objective-state labels."""

    labels: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise InvariantError("state space is empty")
        if len(set(self.labels)) != len(self.labels):
            raise InvariantError("duplicate state labels")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown state {label!r}") from None


# A consequence is a prize label, or a (prize, continuation-menu) pair one
# period before the horizon ends.
Consequence = Union[str, Tuple[str, "Menu"]]


def _ckey(c: Consequence):
    if isinstance(c, str):
        return (0, c)
    if isinstance(c, Menu):
        return (2, c._key())
    prize, menu = c
    return (1, prize, menu._key())


def consequence_str(c: Consequence) -> str:
    if isinstance(c, str):
        return c
    if isinstance(c, Menu):
        return f"menu[{len(c.acts)}]"
    prize, menu = c
    return f"({prize}, menu[{len(menu.acts)}])"


# ---------------------------------------------------------------------------
# lotteries, acts, menus


@dataclass(frozen=True)
class Lottery:
    """Finite-support probability distribution over consequences.

    Entries are merged and zero entries dropped, so two lotteries are
    equal exactly when they are the same distribution.
    """

    probs: Tuple[Tuple[Consequence, object], ...]

    def __post_init__(self):
        merged: Dict = {}
        for c, p in self.probs:
            p = rat(p)
            if p < ZERO:
                raise InvariantError(f"negative probability for {consequence_str(c)}")
            if p > ZERO:
                merged[c] = merged.get(c, ZERO) + p
        total = ZERO
        for p in merged.values():
            total += p
        if total != ONE:
            raise InvariantError(f"lottery probabilities sum to {rat_str(total)}, not 1")
        entries = tuple(sorted(merged.items(), key=lambda cp: _ckey(cp[0])))
        object.__setattr__(self, "probs", entries)

    @classmethod
    def of(cls, mapping: Mapping[Consequence, RatLike]) -> "Lottery":
        return cls(tuple((c, rat(p)) for c, p in mapping.items()))

    @classmethod
    def delta(cls, c: Consequence) -> "Lottery":
        return cls(((c, ONE),))

    @classmethod
    def uniform(cls, consequences: Sequence[Consequence]) -> "Lottery":
        cs = list(consequences)
        if not cs:
            raise InvariantError("uniform lottery over an empty set")
        share = ONE / rat(len(cs))
        return cls(tuple((c, share) for c in cs))

    def support(self) -> Tuple[Consequence, ...]:
        return tuple(c for c, _ in self.probs)

    def prob(self, c: Consequence):
        for cc, p in self.probs:
            if cc == c:
                return p
        return ZERO

    def _key(self):
        return tuple((_ckey(c), (int(p.numerator), int(p.denominator))) for c, p in self.probs)


@dataclass(frozen=True)
class Act:
    """One lottery per objective state, indexed by state position."""

    rows: Tuple[Lottery, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise InvariantError("act has no state rows")

    @classmethod
    def constant(cls, lottery: Lottery, n_states: int) -> "Act":
        return cls((lottery,) * n_states)

    @property
    def n_states(self) -> int:
        return len(self.rows)

    def is_constant(self) -> bool:
        return all(row == self.rows[0] for row in self.rows)

    def _key(self):
        return tuple(row._key() for row in self.rows)


@dataclass(frozen=True)
class Menu:
    """Finite, de-duplicated set of acts over a common state space."""

    acts: Tuple[Act, ...]

    def __post_init__(self):
        acts = tuple(sorted(set(self.acts), key=lambda f: f._key()))
        if not acts:
            raise InvariantError("menu is empty")
        n = acts[0].n_states
        for f in acts:
            if f.n_states != n:
                raise ShapeError("menu mixes acts with different state counts")
        object.__setattr__(self, "acts", acts)

    def __contains__(self, f: Act) -> bool:
        return f in self.acts

    def __len__(self) -> int:
        return len(self.acts)

    def __iter__(self):
        return iter(self.acts)

    @property
    def n_states(self) -> int:
        return self.acts[0].n_states

    def without(self, f: Act) -> "Menu":
        rest = tuple(g for g in self.acts if g != f)
        if not rest:
            raise DomainError("removing the only act leaves an empty menu")
        return Menu(rest)

    def with_act(self, f: Act) -> "Menu":
        return Menu(self.acts + (f,))

    def _key(self):
        return tuple(f._key() for f in self.acts)


# ---------------------------------------------------------------------------
# beliefs and utilities


@dataclass(frozen=True)
class Belief:
    """Rational probability vector over an ordered state space."""

    probs: Tuple[object, ...]

    def __post_init__(self):
        probs = tuple(rat(p) for p in self.probs)
        if not probs:
            raise InvariantError("belief over an empty state space")
        total = ZERO
        for p in probs:
            if p < ZERO:
                raise InvariantError("negative belief probability")
            total += p
        if total != ONE:
            raise InvariantError(f"belief sums to {rat_str(total)}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def of(cls, *probs: RatLike) -> "Belief":
        return cls(tuple(rat(p) for p in probs))

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, s: int):
        return self.probs[s]

    def support(self) -> Tuple[int, ...]:
        return tuple(s for s, p in enumerate(self.probs) if p > ZERO)


@dataclass(frozen=True)
class Utility:
    """Utility values over a finite consequence basis.

    The basis is explicit: evaluating a lottery whose support leaves the
    basis is a domain error naming the missing consequence, rather than
    a silent zero.
    """

    values: Tuple[Tuple[Consequence, object], ...]

    def __post_init__(self):
        entries = tuple(
            sorted(((c, rat(v)) for c, v in self.values), key=lambda cv: _ckey(cv[0]))
        )
        keys = [_ckey(c) for c, _ in entries]
        if len(set(keys)) != len(keys):
            raise InvariantError("duplicate consequence in utility basis")
        if not entries:
            raise InvariantError("utility with an empty basis")
        object.__setattr__(self, "values", entries)

    @classmethod
    def of(cls, mapping: Mapping[Consequence, RatLike]) -> "Utility":
        return cls(tuple(mapping.items()))

    def basis(self) -> Tuple[Consequence, ...]:
        return tuple(c for c, _ in self.values)

    def value(self, c: Consequence):
        for cc, v in self.values:
            if cc == c:
                return v
        raise DomainError(f"consequence {consequence_str(c)} outside utility basis")

    def eval_lottery(self, lottery: Lottery):
        total = ZERO
        for c, p in lottery.probs:
            total += p * self.value(c)
        return total

    @property
    def is_constant(self) -> bool:
        first = self.values[0][1]
        return all(v == first for _, v in self.values)

    def affine(self, scale: RatLike, shift: RatLike) -> "Utility":
        a, b = rat(scale), rat(shift)
        if a <= ZERO:
            raise PreconditionError("affine rescaling needs a positive scale")
        return Utility(tuple((c, a * v + b) for c, v in self.values))

    def direction_key(self):
        """Canonical representative of the positive-affine class.

        Subtract the value at the last basis element, then divide by the
        absolute value of the first nonzero entry. Two utilities induce
        the same ranking of lotteries over the common basis iff their
        keys match (with equal bases).
        """
        base = self.values[-1][1]
        w = [v - base for _, v in self.values]
        pivot = next((abs(x) for x in w if x != ZERO), None)
        if pivot is None:
            return ("const", tuple(_ckey(c) for c, _ in self.values))
        scaled = tuple(x / pivot for x in w)
        return (
            "dir",
            tuple(_ckey(c) for c, _ in self.values),
            tuple((int(x.numerator), int(x.denominator)) for x in scaled),
        )


@dataclass(frozen=True)
class SEUPair:
    """A belief paired with a utility: one subjective evaluation rule."""

    belief: Belief
    utility: Utility

    def eval_act(self, f: Act):
        return eval_act(self, f)


def same_preference(a: SEUPair, b: SEUPair) -> bool:
    """Exact test for equality of induced preferences.

    True iff beliefs match exactly and the utilities are positive affine
    transformations of each other over identical bases.
    """
    if a.belief != b.belief:
        return False
    return a.utility.direction_key() == b.utility.direction_key()


# ---------------------------------------------------------------------------
# operations


def eval_act(seu: SEUPair, f: Act):
    """Subjective expected utility of an act: sum_s q(s) * u(f(s))."""
    if len(f.rows) != len(seu.belief):
        raise ShapeError(
            f"act has {len(f.rows)} state rows, belief has {len(seu.belief)}"
        )
    total = ZERO
    for s, row in enumerate(f.rows):
        q = seu.belief[s]
        if q != ZERO:
            total += q * seu.utility.eval_lottery(row)
    return total


def argmax_set(menu: Menu, seu: SEUPair) -> Tuple[Act, ...]:
    """Acts attaining the menu's maximal subjective expected utility."""
    best = None
    winners = []
    for f in menu:
        v = eval_act(seu, f)
        if best is None or v > best:
            best = v
            winners = [f]
        elif v == best:
            winners.append(f)
    return tuple(winners)


def rationalizes(seu: SEUPair, menu: Menu, f: Act) -> bool:
    """Whether ``f`` maximizes ``seu`` on ``menu``; ``f`` must belong to it."""
    if f not in menu:
        raise DomainError("act is not a member of the menu")
    return f in argmax_set(menu, seu)


def mix(lam: RatLike, x, y):
    """Pointwise mixture lam*x + (1-lam)*y of lotteries, acts, or menus.

    Menus mix in the Minkowski sense: every act of ``x`` against every
    act of ``y``.
    """
    lam = rat(lam)
    if lam < ZERO or lam > ONE:
        raise DomainError("mixture weight outside [0, 1]")
    if isinstance(x, Lottery) and isinstance(y, Lottery):
        if lam == ONE:
            return x
        if lam == ZERO:
            return y
        probs: Dict = {}
        for c, p in x.probs:
            probs[c] = probs.get(c, ZERO) + lam * p
        for c, p in y.probs:
            probs[c] = probs.get(c, ZERO) + (ONE - lam) * p
        return Lottery(tuple(probs.items()))
    if isinstance(x, Act) and isinstance(y, Act):
        if len(x.rows) != len(y.rows):
            raise ShapeError("mixing acts with different state counts")
        return Act(tuple(mix(lam, a, b) for a, b in zip(x.rows, y.rows)))
    if isinstance(x, Menu) and isinstance(y, Menu):
        return Menu(tuple(mix(lam, f, g) for f in x for g in y))
    raise TypeError(f"cannot mix {type(x).__name__} with {type(y).__name__}")


def _coordinates(menu: Menu):
    """Shared embedding of a menu's acts as rational vectors."""
    axes = []
    for s in range(menu.n_states):
        cs = sorted({c for f in menu for c in f.rows[s].support()}, key=_ckey)
        axes.append(cs)
    vectors = {}
    for f in menu:
        vec = []
        for s, cs in enumerate(axes):
            row = f.rows[s]
            vec.extend(row.prob(c) for c in cs)
        vectors[f] = tuple(vec)
    return vectors


def extreme_members(menu: Menu) -> Tuple[Act, ...]:
    """Acts of the menu outside the convex hull of the others.

    Membership is decided by an exact feasibility solve, so the result
    is a certificate rather than a numerical guess.
    """
    vectors = _coordinates(menu)
    out = []
    for f in menu:
        others = [vectors[g] for g in menu if g != f]
        if not others or convex_combination(others, vectors[f]) is None:
            out.append(f)
    return tuple(out)


def bar_menu(menu: Menu) -> Menu:
    """All constant acts built from the menu's state sections."""
    n = menu.n_states
    constants = []
    for f in menu:
        for row in f.rows:
            constants.append(Act.constant(row, n))
    return Menu(tuple(constants))


def uniform_prize_lottery(prizes: Sequence[str]) -> Lottery:
    return Lottery.uniform(tuple(prizes))
