"""Construction of menus that separate finitely many SEU rules.

A separating menu assigns one act to each (belief, utility) pair so that
every rule strictly prefers its own act to all others, with a certified
positive rational margin. The construction is exact end to end:

1. one constant act per utility class, built from lotteries that each
   class's utility ranks strictly on top (quadratic scoring across the
   pairwise-distinct utility directions);
2. within a utility class, acts whose state-value profiles are the
   class members' quadratic scores, so each belief strictly prefers its
   own profile (distinct beliefs have a positive squared-distance gap);
3. a mixture of (2) toward (1) with the weight halved until every
   pairwise strict inequality is certified.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ._rat import ONE, ZERO, rat, rat_sum, sqrt_lower
from .core import (
    Act,
    InvariantError,
    Lottery,
    Menu,
    PreconditionError,
    SEUPair,
    Utility,
    eval_act,
    mix,
    same_preference,
)


@dataclass(frozen=True)
class SeparatingMenu:
    """A menu plus its rule-to-act assignment and the certified margin."""

    menu: Menu
    assignment: Tuple[Tuple[SEUPair, Act], ...]
    margin: object

    def __post_init__(self):
        if rat(self.margin) <= ZERO:
            raise InvariantError("separating margin must be positive")
        for seu, f in self.assignment:
            if f not in self.menu:
                raise InvariantError("assigned act missing from the menu")
            mine = eval_act(seu, f)
            for other, g in self.assignment:
                if g != f and mine - eval_act(seu, g) < rat(self.margin):
                    raise InvariantError(
                        "assignment does not separate with the stated margin"
                    )

    def act_for(self, seu: SEUPair) -> Act:
        for pair, f in self.assignment:
            if pair == seu:
                return f
        raise PreconditionError("rule is not part of this separating menu")


def _common_prizes(utilities: Sequence[Utility]) -> Tuple[str, ...]:
    basis = utilities[0].basis()
    for u in utilities[1:]:
        if u.basis() != basis:
            raise PreconditionError("utilities must share one prize basis")
    for c in basis:
        if not isinstance(c, str):
            raise PreconditionError("separating lotteries need prize utilities")
    return tuple(basis)


def separating_lotteries(utilities: Sequence[Utility]) -> Tuple[Lottery, ...]:
    """One lottery per utility, each strictly top-ranked by its own utility.

    Requires pairwise non-equivalent (positive-affine), non-constant
    utilities over a common prize basis. The certificate is exact: the
    returned lotteries satisfy u_k(p_k) > u_k(p_l) for all l != k.
    """
    utilities = list(utilities)
    if not utilities:
        raise PreconditionError("no utilities supplied")
    prizes = _common_prizes(utilities)
    n = len(prizes)
    for i, u in enumerate(utilities):
        if u.is_constant:
            raise PreconditionError(f"utility {i} is constant")
    for i in range(len(utilities)):
        for j in range(i + 1, len(utilities)):
            if utilities[i].direction_key() == utilities[j].direction_key():
                raise PreconditionError(
                    f"utilities {i} and {j} are positive affine transforms"
                )

    # Centered directions, then near-unit rescaling via certified rational
    # square roots; certificates are re-checked exactly and the precision
    # doubled until the strict inequalities hold.
    centered: List[Tuple] = []
    for u in utilities:
        vals = [u.value(z) for z in prizes]
        mean = rat_sum(vals) / rat(n)
        centered.append(tuple(v - mean for v in vals))

    digits = 20
    while True:
        scaled = []
        ok = True
        for w in centered:
            norm_sq = rat_sum(x * x for x in w)
            r = sqrt_lower(ONE / norm_sq, digits)
            if r == ZERO:
                ok = False
                break
            scaled.append(tuple(r * x for x in w))
        if ok:
            for k, wk in enumerate(scaled):
                for l, wl in enumerate(scaled):
                    if k != l and rat_sum(a * b for a, b in zip(wk, wk)) <= rat_sum(
                        a * b for a, b in zip(wk, wl)
                    ):
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            break
        digits *= 2
        if digits > 1000:  # pragma: no cover - certificates converge fast
            raise PreconditionError("could not certify separating directions")

    # p_k = uniform + eps * w_k stays a lottery for small eps; the centered
    # directions sum to zero so total mass is exactly one.
    base = ONE / rat(n)
    eps = ONE
    for w in scaled:
        for x in w:
            if x < ZERO:
                bound = base / (-x * rat(2))
                if bound < eps:
                    eps = bound
    out = []
    for w in scaled:
        probs = {z: base + eps * x for z, x in zip(prizes, w)}
        out.append(Lottery.of(probs))
    return tuple(out)


def _quadratic_scores(beliefs) -> List[Tuple]:
    """Brier-style score vectors: y_k(s) = 2 q_k(s) - sum_s q_k(s)^2.

    For distinct beliefs q_k, q_l the gap q_k . y_k - q_k . y_l equals
    |q_k - q_l|^2 > 0, which separates every pair of distinct beliefs,
    including positively affinely related ones.
    """
    out = []
    for q in beliefs:
        sq = rat_sum(p * p for p in q.probs)
        out.append(tuple(rat(2) * p - sq for p in q.probs))
    return out


def _value_act(utility: Utility, prizes, targets) -> Act:
    """An act hitting the given per-state utility values exactly.

    Targets must lie inside the utility's attainable range; each state
    row mixes the worst and best prizes.
    """
    vals = [(utility.value(z), z) for z in prizes]
    lo, zlo = min(vals)
    hi, zhi = max(vals)
    rows = []
    for t in targets:
        w = (t - lo) / (hi - lo)
        rows.append(
            Lottery.of({zhi: w, zlo: ONE - w}) if ZERO < w < ONE
            else (Lottery.delta(zhi) if w >= ONE else Lottery.delta(zlo))
        )
    return Act(tuple(rows))


def separating_menu(seus: Sequence[SEUPair]) -> SeparatingMenu:
    """Menu on which each rule strictly chooses its designated act.

    Rules must induce pairwise distinct preferences; a duplicate is a
    precondition error naming the offending pair.
    """
    seus = list(seus)
    if not seus:
        raise PreconditionError("no rules supplied")
    for i in range(len(seus)):
        for j in range(i + 1, len(seus)):
            if same_preference(seus[i], seus[j]):
                raise PreconditionError(
                    f"rules {i} and {j} induce the same preference"
                )
    n_states = len(seus[0].belief)
    for p in seus:
        if len(p.belief) != n_states:
            raise PreconditionError("rules must share one state space")
    prizes = _common_prizes([p.utility for p in seus])

    if len(seus) == 1:
        only = Act.constant(Lottery.uniform(prizes), n_states)
        return SeparatingMenu(Menu((only,)), ((seus[0], only),), ONE)

    # Group by utility class (positive affine equivalence).
    class_of: Dict[int, int] = {}
    reps: List[Utility] = []
    for i, p in enumerate(seus):
        key = p.utility.direction_key()
        for r, u in enumerate(reps):
            if u.direction_key() == key:
                class_of[i] = r
                break
        else:
            class_of[i] = len(reps)
            reps.append(p.utility)

    if len(reps) > 1:
        class_lotteries = separating_lotteries(reps)
    else:
        class_lotteries = (Lottery.uniform(prizes),)
    class_acts = [Act.constant(l, n_states) for l in class_lotteries]

    # Within-class acts from quadratic scores, rescaled into the
    # representative's attainable value range.
    within: Dict[int, Act] = {}
    for r, rep in enumerate(reps):
        members = [i for i in range(len(seus)) if class_of[i] == r]
        scores = _quadratic_scores([seus[i].belief for i in members])
        vals = [rep.value(z) for z in prizes]
        lo, hi = min(vals), max(vals)
        flat = [x for y in scores for x in y]
        y_lo, y_hi = min(flat), max(flat)
        spread = y_hi - y_lo
        if spread == ZERO:
            # single member with a degenerate score spread: any act works
            for i in members:
                within[i] = class_acts[r]
            continue
        scale = (hi - lo) / (rat(2) * spread)
        shift = lo + (hi - lo) / rat(4)
        for i, y in zip(members, scores):
            targets = [shift + scale * (x - y_lo) for x in y]
            within[i] = _value_act(rep, prizes, targets)

    # Mix within-class acts toward the class act, halving until every
    # pairwise strict inequality certifies.
    lam = rat("1/2")
    for _ in range(200):
        designated = [
            mix(lam, within[i], class_acts[class_of[i]]) for i in range(len(seus))
        ]
        values = [
            [eval_act(p, g) for g in designated] for p in seus
        ]
        margin = None
        for k, p in enumerate(seus):
            for l in range(len(seus)):
                if l == k or designated[l] == designated[k]:
                    continue
                gap = values[k][k] - values[k][l]
                if margin is None or gap < margin:
                    margin = gap
        if margin is not None and margin > ZERO:
            menu = Menu(tuple(designated))
            if len(menu) == len(seus):
                assignment = tuple(zip(seus, designated))
                return SeparatingMenu(menu, assignment, margin)
        lam = lam / rat(2)
    raise PreconditionError(
        "could not certify a separating menu; rules may coincide"
    )  # pragma: no cover - distinct preferences always certify
