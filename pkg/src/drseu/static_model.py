"""One-period random subjective expected utility models.

A model is a finite support of (belief, utility) pairs, a joint
distribution over support elements and objective states, and one
tie-breaking cascade per support element. The induced augmented
stochastic choice function (aSCF) reports the joint probability of
choosing an act from a menu while a given objective state realizes.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Protocol, Sequence, Tuple

from ._rat import ONE, ZERO, RatLike, rat, rat_float, rat_str, rat_sum
from .core import (
    Act,
    Belief,
    CoverageError,
    DomainError,
    InvariantError,
    Menu,
    SEUPair,
    ShapeError,
    StateSpace,
    UndefinedConditionalError,
    argmax_set,
    same_preference,
)


class StaticOracle(Protocol):
    """Anything that can answer aSCF queries for one period."""

    states: StateSpace

    def ascf(self, f: Act, menu: Menu, s: int): ...


def _state_index(states: StateSpace, s) -> int:
    if isinstance(s, str):
        return states.index(s)
    s = int(s)
    if not 0 <= s < len(states):
        raise DomainError(f"state index {s} out of range")
    return s


# ---------------------------------------------------------------------------
# tie-breaking


@dataclass(frozen=True)
class TieBreakCascade:
    """Randomized refinement of argmax ties.

    Each stage carries a weight and an auxiliary evaluation rule; with
    the stage's probability, ties are re-judged by that rule and broken
    uniformly inside the refined set. Leftover weight breaks ties
    uniformly on the unrefined tie set, so an empty cascade is a fair
    coin over the tie set.
    """

    stages: Tuple[Tuple[object, SEUPair], ...] = ()

    def __post_init__(self):
        stages = tuple((rat(w), aux) for w, aux in self.stages)
        total = ZERO
        for w, _ in stages:
            if w < ZERO:
                raise InvariantError("negative cascade stage weight")
            total += w
        if total > ONE:
            raise InvariantError("cascade stage weights exceed 1")
        object.__setattr__(self, "stages", stages)

    @classmethod
    def coin(cls) -> "TieBreakCascade":
        return cls(())

    @property
    def residual(self):
        return ONE - rat_sum(w for w, _ in self.stages)


def tie_break_prob(cascade: TieBreakCascade, seu: SEUPair, f: Act, menu: Menu):
    """Probability that the rule (seu, cascade) selects ``f`` from ``menu``."""
    if f not in menu:
        raise DomainError("act is not a member of the menu")
    ties = argmax_set(menu, seu)
    if f not in ties:
        return ZERO
    if len(ties) == 1:
        return ONE
    tie_menu = Menu(ties)
    prob = cascade.residual / rat(len(ties))
    for w, aux in cascade.stages:
        if w == ZERO:
            continue
        refined = argmax_set(tie_menu, aux)
        if f in refined:
            prob += w / rat(len(refined))
    return prob


# ---------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class RSEUModel:
    """Support of SEU pairs + joint weights over (pair, state) + cascades.

    ``joint[i][s]`` is the probability that support element ``i``
    governs choice while objective state ``s`` realizes. Row marginals
    are the support weights; column marginals are the (menu-independent)
    state marginal, required strictly positive. ``flag`` optionally
    declares an information-consistency discipline: ``"cib"`` ties the
    joint to the beliefs (correct conditionals), ``"nuc"`` only forbids
    realized states outside belief supports.
    """

    states: StateSpace
    support: Tuple[SEUPair, ...]
    joint: Tuple[Tuple[object, ...], ...]
    cascades: Tuple[TieBreakCascade, ...] = ()
    flag: Optional[str] = None
    _cache: Dict = field(
        default_factory=dict, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        support = tuple(self.support)
        if not support:
            raise InvariantError("empty support")
        joint = tuple(tuple(rat(p) for p in row) for row in self.joint)
        if len(joint) != len(support):
            raise ShapeError("joint rows do not match support size")
        n_states = len(self.states)
        for row in joint:
            if len(row) != n_states:
                raise ShapeError("joint columns do not match state space")
            for p in row:
                if p < ZERO:
                    raise InvariantError("negative joint weight")
        if rat_sum(p for row in joint for p in row) != ONE:
            raise InvariantError("joint weights do not sum to 1")
        cascades = tuple(self.cascades) or tuple(
            TieBreakCascade.coin() for _ in support
        )
        if len(cascades) != len(support):
            raise ShapeError("cascades do not match support size")
        for i, (q, u) in enumerate((p.belief, p.utility) for p in support):
            if len(q) != n_states:
                raise ShapeError("belief dimension does not match state space")
            if u.is_constant:
                raise InvariantError(f"support element {i} has a constant utility")
            if rat_sum(joint[i]) == ZERO:
                raise InvariantError(f"support element {i} has zero weight")
        for i in range(len(support)):
            for j in range(i + 1, len(support)):
                if same_preference(support[i], support[j]):
                    raise InvariantError(
                        f"support elements {i} and {j} induce the same preference"
                    )
        for s in range(n_states):
            if rat_sum(row[s] for row in joint) == ZERO:
                raise InvariantError(
                    f"state {self.states.labels[s]!r} has zero marginal probability"
                )
        if self.flag not in (None, "cib", "nuc"):
            raise InvariantError(f"unknown flag {self.flag!r}")
        if self.flag == "cib":
            for i, pair in enumerate(support):
                weight = rat_sum(joint[i])
                for s in range(n_states):
                    if joint[i][s] != weight * pair.belief[s]:
                        raise InvariantError(
                            f"cib flag: joint row {i} is not weight * belief"
                        )
        if self.flag == "nuc":
            for i, pair in enumerate(support):
                for s in range(n_states):
                    if joint[i][s] > ZERO and pair.belief[s] == ZERO:
                        raise InvariantError(
                            f"nuc flag: support element {i} realizes state "
                            f"{self.states.labels[s]!r} outside its belief support"
                        )
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "cascades", cascades)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def cib(
        cls,
        states: StateSpace,
        weighted_pairs: Sequence[Tuple[SEUPair, RatLike]],
        cascades: Tuple[TieBreakCascade, ...] = (),
    ) -> "RSEUModel":
        """Build a correct-beliefs model: joint row i = weight_i * belief_i."""
        support = tuple(p for p, _ in weighted_pairs)
        joint = tuple(
            tuple(rat(w) * p.belief[s] for s in range(len(states)))
            for p, w in weighted_pairs
        )
        return cls(states, support, joint, cascades, flag="cib")

    # -- queries ---------------------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    def support_weight(self, i: int):
        return rat_sum(self.joint[i])

    def state_marginal(self, s) -> object:
        s = _state_index(self.states, s)
        return rat_sum(row[s] for row in self.joint)

    def prize_labels(self) -> Tuple[str, ...]:
        seen = []
        for pair in self.support:
            for c in pair.utility.basis():
                if isinstance(c, str) and c not in seen:
                    seen.append(c)
        return tuple(seen)

    def _tau_row(self, menu: Menu) -> Tuple[Dict[Act, object], ...]:
        cached = self._cache.get(menu)
        if cached is None:
            cached = tuple(
                {
                    f: tie_break_prob(self.cascades[i], pair, f, menu)
                    for f in menu
                }
                for i, pair in enumerate(self.support)
            )
            self._cache[menu] = cached
        return cached

    def ascf(self, f: Act, menu: Menu, s):
        s = _state_index(self.states, s)
        if f not in menu:
            raise DomainError("act is not a member of the menu")
        taus = self._tau_row(menu)
        total = ZERO
        for i in range(len(self.support)):
            w = self.joint[i][s]
            if w != ZERO:
                total += w * taus[i][f]
        return total


def ascf(model: StaticOracle, f: Act, menu: Menu, s):
    """Joint probability of choosing ``f`` from ``menu`` in state ``s``."""
    return model.ascf(f, menu, s)


# ---------------------------------------------------------------------------
# tabulated aSCFs


@dataclass(frozen=True)
class ASCFTable:
    """Explicit aSCF rows, keyed by (menu, act, state index).

    With ``strict`` (the default) the defining identities of an aSCF are
    enforced exactly: per-menu total mass one and a menu-independent,
    strictly positive state marginal. Empirical frequency tables built
    from finite samples satisfy only the per-menu normalization, so they
    are stored with ``strict=False``.
    """

    states: StateSpace
    entries: Tuple[Tuple[Tuple[Menu, Act, int], object], ...]
    strict: bool = True

    def __post_init__(self):
        if isinstance(self.entries, Mapping):
            items = tuple(self.entries.items())
        else:
            items = tuple(self.entries)
        norm = []
        menus = {}
        for (menu, f, s), p in items:
            p = rat(p)
            if p < ZERO:
                raise InvariantError("negative aSCF entry")
            s = _state_index(self.states, s)
            if f not in menu:
                raise InvariantError("table row pairs an act with a foreign menu")
            norm.append(((menu, f, s), p))
            menus.setdefault(menu, ZERO)
            menus[menu] += p
        if not menus:
            raise InvariantError("empty aSCF table")
        for menu, total in menus.items():
            if total != ONE:
                raise InvariantError(
                    f"menu rows sum to {rat_str(total)}, not 1"
                )
        object.__setattr__(self, "entries", tuple(norm))
        object.__setattr__(self, "_rows", dict(norm))
        object.__setattr__(self, "_menus", tuple(menus))
        if self.strict:
            marginal = self._marginal_of(self._menus[0])
            for menu in self._menus[1:]:
                if self._marginal_of(menu) != marginal:
                    raise InvariantError(
                        "state marginal differs across menus"
                    )
            for s, p in enumerate(marginal):
                if p == ZERO:
                    raise InvariantError(
                        f"state {self.states.labels[s]!r} has zero marginal"
                    )
            object.__setattr__(self, "_marginal", marginal)
        else:
            object.__setattr__(self, "_marginal", None)

    def _marginal_of(self, menu: Menu) -> Tuple:
        out = [ZERO] * len(self.states)
        for (m, _, s), p in self.entries:
            if m == menu:
                out[s] += p
        return tuple(out)

    @property
    def state_marginal(self) -> Optional[Tuple]:
        return self._marginal

    def menus(self) -> Tuple[Menu, ...]:
        return self._menus

    def ascf(self, f: Act, menu: Menu, s):
        s = _state_index(self.states, s)
        if menu not in self._menus:
            raise CoverageError(f"table has no rows for a probed menu of size {len(menu)}")
        if f not in menu:
            raise DomainError("act is not a member of the menu")
        return self._rows.get((menu, f, s), ZERO)


@dataclass(frozen=True)
class FunctionOracle:
    """Wrap a plain function as an aSCF oracle (used for hand-built probes)."""

    states: StateSpace
    fn: object

    def ascf(self, f: Act, menu: Menu, s):
        return rat(self.fn(f, menu, _state_index(self.states, s)))


# ---------------------------------------------------------------------------
# derived objects


@dataclass(frozen=True)
class DerivedSCF:
    """Choice frequencies with states summed out, plus state conditionals."""

    oracle: object

    def scf(self, f: Act, menu: Menu):
        return rat_sum(
            self.oracle.ascf(f, menu, s) for s in range(len(self.oracle.states))
        )

    def conditional(self, f: Act, menu: Menu) -> Tuple:
        """Distribution of the realized state given that ``f`` was chosen."""
        row = [self.oracle.ascf(f, menu, s) for s in range(len(self.oracle.states))]
        total = rat_sum(row)
        if total == ZERO:
            raise UndefinedConditionalError(
                "conditional undefined: the act is never chosen from this menu"
            )
        return tuple(p / total for p in row)


def derived_scf(oracle: StaticOracle) -> DerivedSCF:
    return DerivedSCF(oracle)


# ---------------------------------------------------------------------------
# simulation


def simulate(model: RSEUModel, menu: Menu, n: int, seed: int) -> ASCFTable:
    """Empirical aSCF frequencies from ``n`` independent draws.

    Sampling is driven by ``random.Random(seed)``, so results are
    reproducible bit-for-bit for a fixed (model, menu, n, seed).
    """
    if n <= 0:
        raise DomainError("sample size must be positive")
    rng = random.Random(seed)
    pairs = [
        (i, s)
        for i in range(len(model.support))
        for s in range(len(model.states))
        if model.joint[i][s] != ZERO
    ]
    cdf = []
    acc = 0.0
    for i, s in pairs:
        acc += rat_float(model.joint[i][s])
        cdf.append(acc)
    cdf[-1] = 1.0

    taus = model._tau_row(menu)
    counts: Dict[Tuple[Act, int], int] = {}
    acts = tuple(menu)
    for _ in range(n):
        r = rng.random()
        idx = 0
        while r > cdf[idx]:
            idx += 1
        i, s = pairs[idx]
        row = taus[i]
        r2 = rng.random()
        acc2 = 0.0
        chosen = acts[-1]
        for f in acts:
            acc2 += rat_float(row[f])
            if r2 <= acc2:
                chosen = f
                break
        counts[(chosen, s)] = counts.get((chosen, s), 0) + 1

    entries = {
        (menu, f, s): rat(c) / rat(n) for (f, s), c in counts.items()
    }
    return ASCFTable(model.states, tuple(entries.items()), strict=False)
