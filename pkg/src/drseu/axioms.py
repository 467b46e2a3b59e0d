"""Finite probe batteries and verdicts for the static choice axioms.

Each check evaluates an exact consequence of the model class on a finite
battery of menus and reports pass/fail with a re-checkable witness, or
inconclusive when a ladder has not stabilized. Checks never use
tolerances: all comparisons are exact rational comparisons, so a fail
witness can be replayed against the oracle verbatim.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ._rat import ONE, ZERO, convex_combination, rat, rat_sum
from .core import (
    Act,
    DomainError,
    InvariantError,
    Lottery,
    Menu,
    PreconditionError,
    SEUPair,
    SupportMismatchError,
    eval_act,
    extreme_members,
    mix,
    rationalizes,
)
from .static_model import RSEUModel, StaticOracle


@dataclass(frozen=True)
class Verdict:
    """Outcome of one check: pass, fail + witness, or inconclusive."""

    status: str
    witness: Optional[dict] = None
    note: str = ""

    def __post_init__(self):
        if self.status not in ("pass", "fail", "inconclusive"):
            raise InvariantError(f"unknown verdict status {self.status!r}")
        if self.status == "fail" and self.witness is None:
            raise InvariantError("fail verdicts carry a witness")

    @property
    def passed(self) -> bool:
        return self.status == "pass"


PASS = Verdict("pass")


@dataclass(frozen=True)
class ProbeBattery:
    """Menus to probe, plus the mixture ladder used by limit arguments.

    The ladder weights are 1 - 2**-j for j = 1..J; J >= 4. Subset pairs
    for monotonicity default to every (A, B) with A obtained from a
    battery menu B by deleting acts, plus every nested pair of battery
    menus.
    """

    menus: Tuple[Menu, ...]
    J: int = 10
    pairings: Optional[Tuple[Tuple[Menu, Menu], ...]] = None

    def __post_init__(self):
        menus = tuple(self.menus)
        if not menus:
            raise InvariantError("battery without menus")
        n = menus[0].n_states
        for m in menus:
            if m.n_states != n:
                raise InvariantError("battery menus mix state dimensions")
        if self.J < 4:
            raise InvariantError("ladder needs at least four rungs")
        object.__setattr__(self, "menus", menus)
        if self.pairings is not None:
            pairs = tuple(self.pairings)
            for small, big in pairs:
                if not all(f in big for f in small):
                    raise InvariantError("pairing is not a menu inclusion")
            object.__setattr__(self, "pairings", pairs)

    @property
    def n_states(self) -> int:
        return self.menus[0].n_states

    def ladder(self) -> Tuple:
        return tuple(ONE - rat(1) / rat(2**j) for j in range(1, self.J + 1))

    def act_pool(self) -> Tuple[Act, ...]:
        seen: List[Act] = []
        for m in self.menus:
            for f in m:
                if f not in seen:
                    seen.append(f)
        return tuple(seen)

    def prize_pool(self) -> Tuple[str, ...]:
        out: List[str] = []
        for f in self.act_pool():
            for row in f.rows:
                for c in row.support():
                    if isinstance(c, str) and c not in out:
                        out.append(c)
        return tuple(sorted(out))

    def subset_pairs(self) -> Tuple[Tuple[Menu, Menu], ...]:
        if self.pairings is not None:
            return self.pairings
        pairs: List[Tuple[Menu, Menu]] = []
        for big in self.menus:
            if len(big) >= 2:
                for f in big:
                    pairs.append((big.without(f), big))
        for a, b in itertools.permutations(self.menus, 2):
            if len(a) < len(b) and all(f in b for f in a):
                pairs.append((a, b))
        return tuple(pairs)

    @classmethod
    def default(cls, pool: Sequence[Act], J: int = 10, max_menu_size: int = 3,
                max_menus: int = 40) -> "ProbeBattery":
        """Menus of size 2..max from the pool, plus pairwise half-mixtures."""
        pool = list(dict.fromkeys(pool))
        menus: List[Menu] = []
        for size in range(2, max_menu_size + 1):
            for combo in itertools.combinations(pool, size):
                menus.append(Menu(combo))
        base = list(menus)
        for a, b in itertools.combinations(base[: min(6, len(base))], 2):
            menus.append(mix(rat("1/2"), a, b))
        dedup = list(dict.fromkeys(menus))[:max_menus]
        return cls(tuple(dedup), J=J)


# ---------------------------------------------------------------------------
# probe construction shared with generators


def state_indep_instances(battery: ProbeBattery, max_sections: int = 3,
                          max_anchors: int = 2):
    """Row-surgery instances for the state-independence check.

    Each instance fixes an anchor act g and a state pair (s1, s2), puts
    a common lottery at both rows, and sweeps a shared section set at
    one row at a time. Yields (f, A1, A1 | A2, s-range).
    """
    pool = battery.act_pool()
    n = battery.n_states
    if n < 2:
        return []
    sections: List[Lottery] = []
    for f in pool:
        for row in f.rows:
            if row not in sections:
                sections.append(row)
    prizes = battery.prize_pool()
    uni = Lottery.uniform(prizes) if prizes else None
    if uni is not None and uni not in sections:
        sections.append(uni)
    sections = sections[:max_sections]
    if len(sections) < 2:
        return []
    c0 = sections[0]
    out = []
    for g in pool[:max_anchors]:
        for s1, s2 in itertools.combinations(range(n), 2):
            rows = list(g.rows)
            rows[s1] = c0
            rows[s2] = c0
            f = Act(tuple(rows))
            a1 = []
            a2 = []
            for sec in sections:
                r1 = list(f.rows)
                r1[s1] = sec
                a1.append(Act(tuple(r1)))
                r2 = list(f.rows)
                r2[s2] = sec
                a2.append(Act(tuple(r2)))
            menu1 = Menu(tuple(a1))
            union = Menu(tuple(a1 + a2))
            out.append((f, menu1, union))
    return out


def axiom_probe_menus(axiom_id: str, battery: ProbeBattery) -> Tuple[Menu, ...]:
    """Menus an axiom check will query; used by generators to avoid ties."""
    if axiom_id == "MONO":
        menus: List[Menu] = []
        for a, b in battery.subset_pairs():
            menus.extend((a, b))
        return tuple(dict.fromkeys(menus))
    if axiom_id in ("LIN", "EXT", "FINITENESS"):
        return battery.menus
    if axiom_id == "STATE_INDEP":
        menus = []
        for _, a1, union in state_indep_instances(battery):
            menus.extend((a1, union))
        return tuple(dict.fromkeys(menus))
    raise DomainError(f"unknown axiom id {axiom_id!r}")


def _rho_bar(oracle: StaticOracle, f: Act, menu: Menu):
    return rat_sum(oracle.ascf(f, menu, s) for s in range(len(oracle.states)))


# ---------------------------------------------------------------------------
# the five statewise axioms


def _check_mono(oracle: StaticOracle, battery: ProbeBattery) -> Verdict:
    for small, big in battery.subset_pairs():
        for f in small:
            for s in range(len(oracle.states)):
                lhs = oracle.ascf(f, small, s)
                rhs = oracle.ascf(f, big, s)
                if lhs < rhs:
                    return Verdict(
                        "fail",
                        {
                            "axiom": "MONO",
                            "menu": small,
                            "larger_menu": big,
                            "act": f,
                            "state": s,
                            "lhs": lhs,
                            "rhs": rhs,
                        },
                    )
    return PASS


_LIN_WEIGHTS = (rat("1/2"), rat("1/4"))


def _check_lin(oracle: StaticOracle, battery: ProbeBattery) -> Verdict:
    pool = battery.act_pool()
    for menu in battery.menus:
        for g in pool[:3]:
            for lam in _LIN_WEIGHTS:
                mixed = mix(lam, menu, Menu((g,)))
                for f in menu:
                    fm = mix(lam, f, g)
                    for s in range(len(oracle.states)):
                        lhs = oracle.ascf(fm, mixed, s)
                        rhs = oracle.ascf(f, menu, s)
                        if lhs != rhs:
                            return Verdict(
                                "fail",
                                {
                                    "axiom": "LIN",
                                    "menu": menu,
                                    "act": f,
                                    "mix_act": g,
                                    "weight": lam,
                                    "state": s,
                                    "lhs": lhs,
                                    "rhs": rhs,
                                },
                            )
    return PASS


def _check_ext(oracle: StaticOracle, battery: ProbeBattery) -> Verdict:
    for menu in battery.menus:
        ext = set(extreme_members(menu))
        for f in menu:
            if f in ext:
                continue
            for s in range(len(oracle.states)):
                p = oracle.ascf(f, menu, s)
                if p != ZERO:
                    return Verdict(
                        "fail",
                        {
                            "axiom": "EXT",
                            "menu": menu,
                            "act": f,
                            "state": s,
                            "mass": p,
                        },
                    )
    return PASS


def _check_state_indep(oracle: StaticOracle, battery: ProbeBattery) -> Verdict:
    for f, menu1, union in state_indep_instances(battery):
        for s in range(len(oracle.states)):
            lhs = oracle.ascf(f, menu1, s)
            rhs = oracle.ascf(f, union, s)
            if lhs != rhs:
                return Verdict(
                    "fail",
                    {
                        "axiom": "STATE_INDEP",
                        "menu": menu1,
                        "union": union,
                        "act": f,
                        "state": s,
                        "lhs": lhs,
                        "rhs": rhs,
                    },
                )
    return PASS


def _check_finiteness(oracle: StaticOracle, battery: ProbeBattery) -> Verdict:
    """Extremal-exclusion check: acts never chosen are mixture-excluded.

    For each menu, B collects the acts chosen with positive probability.
    Every other act, pushed along the ladder toward the uniform constant
    while B is pushed toward the prize corners, must be chosen with
    probability exactly zero at the deep rungs.
    """
    prizes = battery.prize_pool()
    if isinstance(oracle, RSEUModel):
        common = None
        for pair in oracle.support:
            basis = {c for c in pair.utility.basis() if isinstance(c, str)}
            common = basis if common is None else common & basis
        prizes = tuple(sorted(set(prizes) & common))
    if len(prizes) < 2:
        return Verdict("inconclusive", note="prize pool too small to probe")
    n = battery.n_states
    uniform_const = Act.constant(Lottery.uniform(prizes), n)
    corners = Menu(tuple(Act.constant(Lottery.delta(z), n) for z in prizes))
    rungs = battery.ladder()[-3:]
    for menu in battery.menus:
        chosen = [f for f in menu if _rho_bar(oracle, f, menu) > ZERO]
        excluded = [f for f in menu if f not in chosen]
        if not chosen:
            return Verdict("inconclusive", note="menu with no chosen acts")
        base = Menu(tuple(chosen))
        for f in excluded:
            values = []
            for lam in rungs:
                f_j = mix(lam, f, uniform_const)
                b_j = mix(lam, base, corners)
                if f_j in b_j:
                    values.append(None)
                    continue
                probe = b_j.with_act(f_j)
                values.append(_rho_bar(oracle, f_j, probe))
            if None in values or len(set(values)) != 1:
                return Verdict(
                    "inconclusive",
                    note="exclusion ladder did not stabilize",
                )
            if values[0] != ZERO:
                return Verdict(
                    "fail",
                    {
                        "axiom": "FINITENESS",
                        "menu": menu,
                        "act": f,
                        "limit": values[0],
                    },
                )
    return PASS


_AXIOMS = {
    "MONO": _check_mono,
    "LIN": _check_lin,
    "EXT": _check_ext,
    "STATE_INDEP": _check_state_indep,
    "FINITENESS": _check_finiteness,
}


def run_axiom(axiom_id: str, oracle: StaticOracle, battery: ProbeBattery) -> Verdict:
    """Check one statewise axiom on the battery.

    axiom_id is one of MONO, LIN, EXT, STATE_INDEP, FINITENESS. Probing
    a menu the oracle cannot answer raises the oracle's coverage error.
    """
    try:
        check = _AXIOMS[axiom_id]
    except KeyError:
        raise DomainError(f"unknown axiom id {axiom_id!r}") from None
    return check(oracle, battery)


# ---------------------------------------------------------------------------
# information-consistency checks


def _conditional(oracle: StaticOracle, f: Act, menu: Menu):
    row = [oracle.ascf(f, menu, s) for s in range(len(oracle.states))]
    total = rat_sum(row)
    if total == ZERO:
        return None
    return tuple(p / total for p in row)


def _rationalizers(candidates, menu: Menu, f: Act) -> Tuple[SEUPair, ...]:
    pairs = getattr(candidates, "support", candidates)
    return tuple(p for p in pairs if rationalizes(p, menu, f))


def check_cib(oracle: StaticOracle, candidate_support, battery: ProbeBattery) -> Verdict:
    """Correct-information-by-Bayes: each observed state conditional lies
    in the convex hull of the beliefs that rationalize the choice."""
    for menu in battery.menus:
        for f in menu:
            cond = _conditional(oracle, f, menu)
            if cond is None:
                continue
            rats = _rationalizers(candidate_support, menu, f)
            if not rats:
                raise SupportMismatchError(
                    "chosen act has no rationalizer among the candidates"
                )
            hull = [tuple(p.belief.probs) for p in rats]
            if convex_combination(hull, cond) is None:
                return Verdict(
                    "fail",
                    {
                        "check": "CIB",
                        "menu": menu,
                        "act": f,
                        "conditional": cond,
                        "beliefs": tuple(hull),
                    },
                )
    return PASS


def check_nuc(oracle: StaticOracle, candidate_support, battery: ProbeBattery) -> Verdict:
    """No-unforeseen-contingencies: observed conditionals put no mass on
    states outside every rationalizing belief's support."""
    for menu in battery.menus:
        for f in menu:
            cond = _conditional(oracle, f, menu)
            if cond is None:
                continue
            rats = _rationalizers(candidate_support, menu, f)
            if not rats:
                raise SupportMismatchError(
                    "chosen act has no rationalizer among the candidates"
                )
            allowed = set()
            for p in rats:
                allowed.update(p.belief.support())
            for s, mass in enumerate(cond):
                if mass > ZERO and s not in allowed:
                    return Verdict(
                        "fail",
                        {
                            "check": "NUC",
                            "menu": menu,
                            "act": f,
                            "state": s,
                            "mass": mass,
                        },
                    )
    return PASS


# ---------------------------------------------------------------------------
# deterministic taste (constant-menu limits)


def _lex_tie_break(model: RSEUModel, i: int, f: Act, menu_acts: Sequence[Act],
                   best: Act):
    """Limit tie-break probability as the mixture weight approaches 1.

    Values are ordered lexicographically by (own value, pull toward the
    best act), which is the exact limit order of lam*f + (1-lam)*best as
    lam -> 1.
    """
    pair = model.support[i]

    def value(seu: SEUPair, g: Act, probed: bool):
        v = eval_act(seu, g)
        d = (eval_act(seu, best) - eval_act(seu, f)) if probed else ZERO
        return (v, d)

    entries = [(g, value(pair, g, g == f)) for g in menu_acts]
    top = max(v for _, v in entries)
    ties = [g for g, v in entries if v == top]
    if f not in ties:
        return ZERO
    if len(ties) == 1:
        return ONE
    cascade = model.cascades[i]
    prob = cascade.residual / rat(len(ties))
    for w, aux in cascade.stages:
        if w == ZERO:
            continue
        sub = [(g, value(aux, g, g == f)) for g in ties]
        subtop = max(v for _, v in sub)
        refined = [g for g, v in sub if v == subtop]
        if f in refined:
            prob += w / rat(len(refined))
    return prob


def check_c_determinism(oracle: StaticOracle, best_act: Act,
                        battery: ProbeBattery) -> Verdict:
    """Degenerate limit choice over constant menus.

    Precondition: best_act beats every other constant act outright
    (binary-menu choice probability exactly zero). Then for every act f
    of every battery menu, the choice probability of lam*f +
    (1-lam)*best_act from the patched menu must stabilize to 0 or 1
    along the ladder. Menus with non-constant acts are a domain error.
    """
    if not best_act.is_constant():
        raise DomainError("best act must be constant")
    for menu in battery.menus:
        for f in menu:
            if not f.is_constant():
                raise DomainError("deterministic-taste battery must use constant menus")
    for f in battery.act_pool():
        if f == best_act:
            continue
        pair_menu = Menu((f, best_act))
        if _rho_bar(oracle, f, pair_menu) != ZERO:
            raise PreconditionError(
                "stated best act does not dominate every constant act"
            )

    exact = isinstance(oracle, RSEUModel)
    rungs = battery.ladder()[-3:]
    for menu in battery.menus:
        for f in menu:
            rest = [g for g in menu if g != f]
            if not rest:
                continue
            if exact:
                limit = ZERO
                for i in range(len(oracle.support)):
                    weight = oracle.support_weight(i)
                    limit += weight * _lex_tie_break(
                        oracle, i, f, [f] + rest, best_act
                    )
                values = [limit]
            else:
                values = []
                for lam in rungs:
                    m = mix(lam, f, best_act)
                    probe = Menu(tuple(rest + [m]))
                    if m in Menu(tuple(rest)):
                        values.append(None)
                        continue
                    values.append(_rho_bar(oracle, m, probe))
                if None in values or len(set(values)) != 1:
                    return Verdict(
                        "inconclusive", note="constant-menu ladder did not stabilize"
                    )
                values = [values[0]]
            if values[0] not in (ZERO, ONE):
                return Verdict(
                    "fail",
                    {
                        "check": "C_DET",
                        "menu": menu,
                        "act": f,
                        "limit": values[0],
                    },
                )
    return PASS
