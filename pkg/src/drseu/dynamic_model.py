"""Multi-period models over trees of subjective states.

A dynamic model is a finite tree: nodes carry a belief, a non-constant
utility, and the objective state that realizes alongside them; edges
carry rational transition kernels. History-conditional choice is the
exact ratio formula (paths consistent with the observed triples,
weighted by kernel mass times tie-break mass), menus act purely as
instruments, and the dynamic history axioms are checked on finite
probe instances with exact rational comparisons throughout.
"""
from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ._rat import ONE, ZERO, RatLike, rat, rat_float, rat_sum
from .core import (
    Act,
    Belief,
    ConditioningError,
    DomainError,
    InstanceError,
    InvariantError,
    Lottery,
    Menu,
    SEUPair,
    ShapeError,
    StateSpace,
    Utility,
    argmax_set,
    mix,
)
from .axioms import PASS, Verdict
from .static_model import TieBreakCascade, _state_index, tie_break_prob


# ---------------------------------------------------------------------------
# tree nodes and models


@dataclass(frozen=True)
class SubjectiveState:
    """One tree node: (belief, utility, realized state) plus children.

    The triple is the period's subjective state; ``children`` carries the
    transition kernel as (probability, node) pairs. Predecessors are
    implicit in the nesting, so every node has a unique parent chain by
    construction. Siblings must differ as triples, though they may share
    the (belief, utility) part while realizing different states; siblings
    that do share it must also share the tie-break cascade, since choice
    happens before the state realizes.
    """

    belief: Belief
    utility: Utility
    state: int
    children: Tuple[Tuple[object, "SubjectiveState"], ...] = ()
    cascade: TieBreakCascade = field(default_factory=TieBreakCascade.coin)
    _height: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        state = int(self.state)
        if not 0 <= state < len(self.belief):
            raise InvariantError("realized state outside the belief's state space")
        if self.utility.is_constant:
            raise InvariantError("constant utility cannot govern choice")
        children = tuple((rat(p), child) for p, child in self.children)
        if children:
            total = ZERO
            for p, _ in children:
                if p <= ZERO:
                    raise InvariantError("child weights must be positive")
                total += p
            if total != ONE:
                raise InvariantError("child weights do not sum to 1")
            if len({len(child.belief) for _, child in children}) != 1:
                raise ShapeError("children mix belief dimensions")
            if len({child._height for _, child in children}) != 1:
                raise InvariantError("children have unequal subtree heights")
            _check_siblings(tuple(child for _, child in children))
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "children", children)
        height = 0 if not children else 1 + children[0][1]._height
        object.__setattr__(self, "_height", height)

    @property
    def seu(self) -> SEUPair:
        return SEUPair(self.belief, self.utility)


def _check_siblings(nodes: Tuple[SubjectiveState, ...]) -> None:
    triples = [(n.belief, n.utility, n.state) for n in nodes]
    if len(set(triples)) != len(triples):
        raise InvariantError("siblings repeat a (belief, utility, state) triple")
    rules: Dict = {}
    for n in nodes:
        prior = rules.setdefault((n.belief, n.utility), n.cascade)
        if prior != n.cascade:
            raise InvariantError(
                "siblings sharing an SEU carry different tie-break cascades"
            )


@dataclass(frozen=True)
class DynamicModel:
    """A tree of subjective states over per-period objective state spaces.

    ``roots`` is the period-0 distribution over nodes; every leaf sits at
    the final period, so the tree spans the full horizon. ``flag``
    optionally declares an information discipline: ``"cib"`` requires each
    (belief, utility) group of siblings to split its weight exactly as the
    belief prescribes, ``"nuc"`` only forbids realized states outside
    belief supports.
    """

    state_spaces: Tuple[StateSpace, ...]
    roots: Tuple[Tuple[object, SubjectiveState], ...]
    flag: Optional[str] = None

    def __post_init__(self):
        spaces = tuple(self.state_spaces)
        if not spaces:
            raise InvariantError("model needs at least one period")
        roots = tuple((rat(p), node) for p, node in self.roots)
        if not roots:
            raise InvariantError("empty root distribution")
        total = ZERO
        for p, _ in roots:
            if p <= ZERO:
                raise InvariantError("root weights must be positive")
            total += p
        if total != ONE:
            raise InvariantError("root weights do not sum to 1")
        _check_siblings(tuple(node for _, node in roots))
        level = [node for _, node in roots]
        for t, space in enumerate(spaces):
            if not level:
                raise InvariantError(f"tree ends before period {t}")
            for node in level:
                if len(node.belief) != len(space):
                    raise ShapeError(
                        f"period-{t} node belief does not match its state space"
                    )
            level = [child for node in level for _, child in node.children]
        if level:
            raise InvariantError("tree outlives the final state space")
        if self.flag not in (None, "cib", "nuc"):
            raise InvariantError(f"unknown flag {self.flag!r}")
        if self.flag is not None:
            stack = [node for _, node in roots]
            while stack:
                node = stack.pop()
                if node.belief[node.state] == ZERO:
                    raise InvariantError(
                        f"{self.flag} flag: a node realizes a state outside "
                        "its belief support"
                    )
                stack.extend(child for _, child in node.children)
        if self.flag == "cib":
            _check_cib_groups(roots, "root")
            stack = [node for _, node in roots]
            while stack:
                node = stack.pop()
                if node.children:
                    _check_cib_groups(node.children, "child")
                stack.extend(child for _, child in node.children)
        object.__setattr__(self, "state_spaces", spaces)
        object.__setattr__(self, "roots", roots)

    @property
    def horizon(self) -> int:
        """Index of the final period (0 for a one-period model)."""
        return len(self.state_spaces) - 1


def _check_cib_groups(
    weighted: Tuple[Tuple[object, SubjectiveState], ...], kind: str
) -> None:
    groups: Dict = {}
    for p, node in weighted:
        groups.setdefault((node.belief, node.utility), []).append((p, node.state))
    for (belief, _), members in groups.items():
        weight = rat_sum(p for p, _ in members)
        got = {s: p for p, s in members}
        want = {s: weight * belief[s] for s in belief.support()}
        if got != want:
            raise InvariantError(
                f"cib flag: {kind} weights are not group weight times belief"
            )


# ---------------------------------------------------------------------------
# histories


@dataclass(frozen=True)
class History:
    """Observed (menu, chosen act, realized state) triples, oldest first."""

    triples: Tuple[Tuple[Menu, Act, int], ...]

    def __post_init__(self):
        triples = []
        for menu, act, s in self.triples:
            s = int(s)
            if act not in menu:
                raise DomainError("history records an act outside its menu")
            if not 0 <= s < menu.n_states:
                raise DomainError(f"history state index {s} out of range")
            triples.append((menu, act, s))
        object.__setattr__(self, "triples", tuple(triples))

    @classmethod
    def empty(cls) -> "History":
        return cls(())

    @classmethod
    def of(cls, *triples: Tuple[Menu, Act, int]) -> "History":
        return cls(tuple(triples))

    def then(self, menu: Menu, act: Act, s: int) -> "History":
        return History(self.triples + ((menu, act, int(s)),))

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)


def _check_history_shape(model: DynamicModel, history: History) -> None:
    if len(history) > len(model.state_spaces):
        raise DomainError("history is longer than the model horizon")
    for t, (menu, _, s) in enumerate(history):
        space = model.state_spaces[t]
        if menu.n_states != len(space):
            raise ShapeError(f"period-{t} menu does not match its state space")
        if s >= len(space):
            raise DomainError(f"period-{t} state index {s} out of range")


def _frontier(model: DynamicModel, history: History) -> Dict[SubjectiveState, object]:
    """Nodes of the last observed period with their accumulated path mass.

    Equal nodes (hence equal subtrees) are aggregated; paths that
    contradict a realized state or carry zero choice mass are pruned.
    """
    _check_history_shape(model, history)
    front: Dict[SubjectiveState, object] = {}
    for p, node in model.roots:
        front[node] = front.get(node, ZERO) + p
    for t, (menu, act, s) in enumerate(history):
        if t > 0:
            advanced: Dict[SubjectiveState, object] = {}
            for node, w in front.items():
                for p, child in node.children:
                    advanced[child] = advanced.get(child, ZERO) + w * p
            front = advanced
        surviving: Dict[SubjectiveState, object] = {}
        for node, w in front.items():
            if node.state != s:
                continue
            t_mass = tie_break_prob(node.cascade, node.seu, act, menu)
            if t_mass != ZERO:
                surviving[node] = w * t_mass
        front = surviving
    return front


def history_prob(model: DynamicModel, history: History):
    """Exact probability of observing the history's triples in order.

    Sums, over every tree path whose realized states match, the product
    of kernel mass and per-period tie-break mass of the recorded
    choices. The empty history has probability one. Menus carry no
    arrival probabilities: they are conditioning instruments, so a
    history's mass is about choices and states only.
    """
    return rat_sum(_frontier(model, history).values())


def consistent_weights(model: DynamicModel, history: History):
    """Unnormalized posterior over final-period nodes after a history.

    Maps each node of the last observed period to the total mass of
    surviving paths ending there; the values sum to the history's
    probability. Needs at least one observed period.
    """
    if len(history) == 0:
        raise DomainError("no period has been observed yet")
    return dict(_frontier(model, history))


def consistent_states(model: DynamicModel, history: History) -> frozenset:
    """Nodes reachable with positive probability alongside the history."""
    return frozenset(consistent_weights(model, history))


def conditional_ascf(model: DynamicModel, f: Act, menu: Menu, s, history: History):
    """History-conditional joint probability of (choose f from menu, state s).

    Evaluates the exact ratio formula: paths consistent with the history
    extended by (menu, f, s), over paths consistent with the history.
    """
    period = len(history)
    if period >= len(model.state_spaces):
        raise DomainError("probe period lies beyond the model horizon")
    space = model.state_spaces[period]
    s = _state_index(space, s)
    if menu.n_states != len(space):
        raise ShapeError(f"period-{period} menu does not match its state space")
    front = _frontier(model, history)
    denominator = rat_sum(front.values())
    if denominator == ZERO:
        raise ConditioningError("conditioning on a zero-probability history")
    if period > 0:
        advanced: Dict[SubjectiveState, object] = {}
        for node, w in front.items():
            for p, child in node.children:
                advanced[child] = advanced.get(child, ZERO) + w * p
        front = advanced
    numerator = ZERO
    for node, w in front.items():
        if node.state == s:
            numerator += w * tie_break_prob(node.cascade, node.seu, f, menu)
    return numerator / denominator


def node_ascf(model: DynamicModel, node: SubjectiveState, f: Act, menu: Menu, s: int):
    """One-period choice rule of the subtree below a node.

    Kernel-weighted tie-break mass over the node's children that realize
    state ``s``; this is what the history-conditional rule averages over
    the consistent nodes.
    """
    if not node.children:
        raise DomainError("node has no continuation period")
    if menu.n_states != len(node.children[0][1].belief):
        raise ShapeError("menu does not match the children's state space")
    s = int(s)
    if not 0 <= s < menu.n_states:
        raise DomainError(f"state index {s} out of range")
    total = ZERO
    for p, child in node.children:
        if child.state == s:
            total += p * tie_break_prob(child.cascade, child.seu, f, menu)
    return total


# ---------------------------------------------------------------------------
# the extended choice rule


def extended_ascf(model: DynamicModel, f: Act, menu: Menu, s, history: History):
    """History-conditional choice extended to menus the history cannot reach.

    Definitionally this mixes the history against a deterministic
    constant-act chain delivering the menu and conditions on the mixture;
    the value is independent of the mixture weight and chain chosen, and
    equals the plain ratio formula, which never consults menu arrival in
    the first place. The mixture preserves every path's choice mass
    exactly, so zero-probability histories stay unconditionable here too.
    """
    return conditional_ascf(model, f, menu, s, history)


def deterministic_chain(history: History, next_menu: Menu, prize: str = "z0") -> History:
    """Constant-act chain matching a history's shape and leading to a menu.

    Every period offers a single constant act, chosen with probability
    one whatever the tree looks like; the final act delivers
    ``(prize, next_menu)`` for sure, earlier ones deliver each successor
    singleton. Mixing a history against such a chain is how conditioning
    extends to menus the history itself cannot deliver.
    """
    triples: List[Tuple[Menu, Act, int]] = []
    upcoming: Menu = next_menu
    for menu, _, s in reversed(history.triples):
        act = Act.constant(Lottery.delta((prize, upcoming)), menu.n_states)
        singleton = Menu((act,))
        triples.append((singleton, act, s))
        upcoming = singleton
    return History(tuple(reversed(triples)))


def mix_history(lam: RatLike, history: History, other: History) -> History:
    """Periodwise mixture of two histories, keeping the first one's states."""
    lam = rat(lam)
    if not ZERO < lam <= ONE:
        raise DomainError("history mixture weight outside (0, 1]")
    if len(history) != len(other):
        raise ShapeError("mixing histories of different lengths")
    triples = tuple(
        (mix(lam, menu, menu2), mix(lam, act, act2), s)
        for (menu, act, s), (menu2, act2, _) in zip(history, other)
    )
    return History(triples)


# ---------------------------------------------------------------------------
# ties and revealed preference


def menu_without_ties(model: DynamicModel, menu: Menu, history: History) -> bool:
    """Whether no SEU the history leaves possible is indifferent on the menu.

    Exact characterization: every (belief, utility) with positive kernel
    mass after the history has a singleton argmax on the menu. A
    zero-probability history leaves nothing possible, so it never
    produces ties.
    """
    period = len(history)
    if period >= len(model.state_spaces):
        raise DomainError("probe period lies beyond the model horizon")
    if period == 0:
        seus = {node.seu for _, node in model.roots}
    else:
        seus = {
            child.seu
            for node in _frontier(model, history)
            for _, child in node.children
        }
    return all(len(argmax_set(menu, seu)) == 1 for seu in seus)


def revealed_geq(model: DynamicModel, history: History, g: Act, r: Act) -> bool:
    """Unanimous weak preference for g over r across the consistent nodes.

    True iff every (belief, utility) consistent with the history values
    ``g`` at least as highly as ``r``. With several consistent nodes the
    relation is typically incomplete: neither act need dominate.
    """
    if len(history) == 0:
        raise DomainError("no period has been observed yet")
    front = _frontier(model, history)
    if not front:
        raise ConditioningError("conditioning on a zero-probability history")
    return all(node.seu.eval_act(g) >= node.seu.eval_act(r) for node in front)


# ---------------------------------------------------------------------------
# history axioms


@dataclass(frozen=True)
class CHIInstance:
    """A contraction surgery: one period's menu grows, choice mass agrees.

    ``history`` must choose, at ``period``, an act from a menu nested in
    ``larger_menu`` with the same conditional mass either way (checked
    against the oracle at run time); the axiom then asserts the two
    surgeries condition all later probes identically.
    """

    history: History
    period: int
    larger_menu: Menu
    probes: Tuple[Tuple[Act, Menu, int], ...]

    def __post_init__(self):
        if not 0 <= self.period < len(self.history):
            raise InstanceError("surgery period outside the history")
        menu, _, _ = self.history.triples[self.period]
        if not all(a in self.larger_menu for a in menu):
            raise InstanceError("surgery menu is not nested in the larger menu")

    def surgered(self) -> History:
        menu, act, s = self.history.triples[self.period]
        triples = list(self.history.triples)
        triples[self.period] = (self.larger_menu, act, s)
        return History(tuple(triples))


@dataclass(frozen=True)
class LHIInstance:
    """A linear surgery: one period is mixed against an alternative menu.

    The axiom asserts the probability-weighted average of conditioning on
    each mixed variant reproduces conditioning on the original history.
    """

    history: History
    period: int
    mix_menu: Menu
    weight: object
    probes: Tuple[Tuple[Act, Menu, int], ...]

    def __post_init__(self):
        if not 0 <= self.period < len(self.history):
            raise InstanceError("surgery period outside the history")
        lam = rat(self.weight)
        if not ZERO < lam <= ONE:
            raise InstanceError("mixture weight outside (0, 1]")
        object.__setattr__(self, "weight", lam)

    def variants(self) -> Tuple[History, ...]:
        menu, act, s = self.history.triples[self.period]
        mixed_menu = mix(self.weight, menu, self.mix_menu)
        out = []
        for g in self.mix_menu:
            triples = list(self.history.triples)
            triples[self.period] = (mixed_menu, mix(self.weight, act, g), s)
            out.append(History(tuple(triples)))
        return tuple(out)


@dataclass(frozen=True)
class MixtureLadder:
    """Per-period perturbers pulling a history through tie-free neighbors.

    ``perturbers`` assigns, period by period, a constant act to every
    menu member; rung j replaces each act g by 2^-j c_g + (1 - 2^-j) g,
    so the rung histories converge back to the original as j grows.
    """

    perturbers: Tuple[Tuple[Tuple[Act, Act], ...], ...]
    rungs: int = 10

    def __post_init__(self):
        if self.rungs < 4:
            raise InstanceError("ladder needs at least four rungs")
        for assignments in self.perturbers:
            for _, c in assignments:
                if not c.is_constant():
                    raise InstanceError("ladder perturbers must be constant acts")

    def rung_history(self, history: History, j: int) -> History:
        alpha = rat(1) / rat(2 ** j)
        triples = []
        for (menu, act, s), assignments in zip(history, self.perturbers):
            table = dict(assignments)
            rung_menu = Menu(tuple(mix(alpha, table[g], g) for g in menu))
            triples.append((rung_menu, mix(alpha, table[act], act), s))
        return History(tuple(triples))


@dataclass(frozen=True)
class HCONTInstance:
    """A continuity probe: ladder limits must bracket the probed value."""

    history: History
    probes: Tuple[Tuple[Act, Menu, int], ...]
    ladders: Tuple[MixtureLadder, ...]

    def __post_init__(self):
        for ladder in self.ladders:
            if len(ladder.perturbers) != len(self.history):
                raise InstanceError("ladder does not cover every period")
            for (menu, _, _), assignments in zip(self.history, ladder.perturbers):
                if {g for g, _ in assignments} != set(menu.acts):
                    raise InstanceError("ladder must perturb every menu act")


class _ModelOracle:
    """Adapter exposing a model through the history-oracle protocol."""

    def __init__(self, model: DynamicModel):
        self.model = model

    def cond_ascf(self, f: Act, menu: Menu, s, history: History):
        return conditional_ascf(self.model, f, menu, s, history)

    def history_prob(self, history: History):
        return history_prob(self.model, history)


@dataclass(frozen=True)
class FunctionHistoryOracle:
    """Black-box history oracle from two callables (conditional, mass)."""

    cond: Callable[[Act, Menu, int, History], RatLike]
    prob: Callable[[History], RatLike]

    def cond_ascf(self, f: Act, menu: Menu, s, history: History):
        return rat(self.cond(f, menu, s, history))

    def history_prob(self, history: History):
        return rat(self.prob(history))


def _as_history_oracle(oracle):
    if isinstance(oracle, DynamicModel):
        return _ModelOracle(oracle)
    if hasattr(oracle, "cond_ascf") and hasattr(oracle, "history_prob"):
        return oracle
    raise DomainError("object cannot answer history-conditional queries")


def _positive_history(oracle, history: History) -> None:
    if oracle.history_prob(history) == ZERO:
        raise InstanceError("instance conditions on a zero-probability history")


def _check_chi(oracle, instance: CHIInstance) -> Verdict:
    menu, act, s = instance.history.triples[instance.period]
    prefix = History(instance.history.triples[: instance.period])
    try:
        small = oracle.cond_ascf(act, menu, s, prefix)
        large = oracle.cond_ascf(act, instance.larger_menu, s, prefix)
    except ConditioningError as exc:
        raise InstanceError(str(exc)) from None
    if small != large:
        raise InstanceError(
            "conditional choice mass moves when the surgery menu grows"
        )
    surgered = instance.surgered()
    _positive_history(oracle, instance.history)
    _positive_history(oracle, surgered)
    for f, probe_menu, probe_s in instance.probes:
        lhs = oracle.cond_ascf(f, probe_menu, probe_s, instance.history)
        rhs = oracle.cond_ascf(f, probe_menu, probe_s, surgered)
        if lhs != rhs:
            return Verdict(
                "fail",
                witness={
                    "axiom": "CHI",
                    "period": instance.period,
                    "act": f,
                    "menu": probe_menu,
                    "state": probe_s,
                    "lhs": lhs,
                    "rhs": rhs,
                },
            )
    return PASS


def _check_lhi(oracle, instance: LHIInstance) -> Verdict:
    _positive_history(oracle, instance.history)
    variants = instance.variants()
    masses = [oracle.history_prob(v) for v in variants]
    total = rat_sum(masses)
    if total == ZERO:
        raise InstanceError("every mixed variant has zero probability")
    for f, probe_menu, probe_s in instance.probes:
        lhs = oracle.cond_ascf(f, probe_menu, probe_s, instance.history)
        rhs = ZERO
        for mass, variant in zip(masses, variants):
            if mass != ZERO:
                rhs += mass * oracle.cond_ascf(f, probe_menu, probe_s, variant)
        rhs = rhs / total
        if lhs != rhs:
            return Verdict(
                "fail",
                witness={
                    "axiom": "LHI",
                    "period": instance.period,
                    "act": f,
                    "menu": probe_menu,
                    "state": probe_s,
                    "lhs": lhs,
                    "rhs": rhs,
                },
            )
    return PASS


def _ladder_admissible(model: Optional[DynamicModel], rung: History) -> bool:
    if model is None:
        return True
    for t in range(len(rung)):
        menu, _, _ = rung.triples[t]
        if not menu_without_ties(model, menu, History(rung.triples[:t])):
            return False
    return True


def _check_hcont(oracle, instance: HCONTInstance) -> Verdict:
    _positive_history(oracle, instance.history)
    model = oracle.model if isinstance(oracle, _ModelOracle) else None
    limits: Dict[int, List] = {i: [] for i in range(len(instance.probes))}
    for ladder in instance.ladders:
        tail = range(ladder.rungs - 2, ladder.rungs + 1)
        values: List[List] = []
        usable = True
        for j in tail:
            rung = ladder.rung_history(instance.history, j)
            if not _ladder_admissible(model, rung):
                usable = False
                break
            try:
                values.append(
                    [oracle.cond_ascf(f, m, s, rung) for f, m, s in instance.probes]
                )
            except ConditioningError:
                usable = False
                break
        if not usable:
            continue
        for i in range(len(instance.probes)):
            seen = {vals[i] for vals in values}
            if len(seen) == 1:
                limits[i].append(seen.pop())
    unresolved = [i for i, vals in limits.items() if not vals]
    if unresolved:
        return Verdict(
            "inconclusive",
            note="no admissible ladder stabilized for every probe",
        )
    for i, (f, probe_menu, probe_s) in enumerate(instance.probes):
        actual = oracle.cond_ascf(f, probe_menu, probe_s, instance.history)
        lo, hi = min(limits[i]), max(limits[i])
        if not lo <= actual <= hi:
            return Verdict(
                "fail",
                witness={
                    "axiom": "HCONT",
                    "act": f,
                    "menu": probe_menu,
                    "state": probe_s,
                    "value": actual,
                    "low": lo,
                    "high": hi,
                },
            )
    return PASS


_HISTORY_AXIOMS = {
    "CHI": (_check_chi, CHIInstance),
    "LHI": (_check_lhi, LHIInstance),
    "HCONT": (_check_hcont, HCONTInstance),
}


def run_history_axiom(axiom_id: str, oracle, instances: Sequence) -> Verdict:
    """Check one dynamic axiom on a sequence of probe instances.

    axiom_id is one of CHI, LHI, HCONT. Equality axioms are exact; the
    continuity check brackets probed values by stabilized ladder limits
    and reports inconclusive when no admissible ladder stabilizes.
    """
    try:
        check, instance_type = _HISTORY_AXIOMS[axiom_id]
    except KeyError:
        raise DomainError(f"unknown history axiom {axiom_id!r}") from None
    oracle = _as_history_oracle(oracle)
    inconclusive = None
    for instance in instances:
        if not isinstance(instance, instance_type):
            raise InstanceError(
                f"{axiom_id} expects {instance_type.__name__} instances"
            )
        verdict = check(oracle, instance)
        if verdict.status == "fail":
            return verdict
        if verdict.status == "inconclusive":
            inconclusive = verdict
    return inconclusive or PASS


# ---------------------------------------------------------------------------
# simulation


def simulate_paths(
    model: DynamicModel, menu0: Menu, n: int, seed: int = 0
) -> Dict[History, int]:
    """Sample full histories from the generative process, counting repeats.

    Each draw walks the tree: a node arrives by kernel mass, choice is
    sampled from the node's tie-break distribution, the node's state
    realizes, and the chosen act's lottery at that state picks the
    consequence whose menu continues the walk. Mid-horizon consequences
    must therefore be (prize, menu) pairs.
    """
    if n <= 0:
        raise DomainError("sample size must be positive")
    if menu0.n_states != len(model.state_spaces[0]):
        raise ShapeError("period-0 menu does not match its state space")
    rng = random.Random(seed)
    horizon = model.horizon
    choice_cache: Dict = {}
    lottery_cache: Dict = {}
    kernel_cache: Dict = {}

    def cumulative(pairs):
        acc, cum, items = 0.0, [], []
        for weight, item in pairs:
            acc += rat_float(weight)
            cum.append(acc)
            items.append(item)
        cum[-1] = 1.0
        return cum, items

    def pick(cum, items):
        return items[bisect_right(cum, rng.random())]

    def choice_dist(node: SubjectiveState, menu: Menu):
        key = (id(node), id(menu))
        entry = choice_cache.get(key)
        if entry is None:
            pairs = [
                (tie_break_prob(node.cascade, node.seu, f, menu), f) for f in menu
            ]
            entry = cumulative(pairs) + (node, menu)
            choice_cache[key] = entry
        return entry[0], entry[1]

    roots_cum, roots_items = cumulative(model.roots)
    counts: Dict[Tuple, int] = {}
    paths: Dict[Tuple, Tuple] = {}
    for _ in range(n):
        node = pick(roots_cum, roots_items)
        menu = menu0
        key: Tuple = ()
        triples: Tuple = ()
        for t in range(horizon + 1):
            act = pick(*choice_dist(node, menu))
            s = node.state
            key += ((id(menu), id(act), s),)
            triples += ((menu, act, s),)
            if t == horizon:
                break
            lkey = (id(act), s)
            entry = lottery_cache.get(lkey)
            if entry is None:
                row = act.rows[s]
                entry = cumulative((p, c) for c, p in row.probs) + (act,)
                lottery_cache[lkey] = entry
            consequence = pick(entry[0], entry[1])
            if isinstance(consequence, str):
                raise DomainError(
                    f"terminal prize {consequence!r} reached before the horizon"
                )
            _, menu = consequence
            kkey = id(node)
            entry = kernel_cache.get(kkey)
            if entry is None:
                entry = cumulative(node.children) + (node,)
                kernel_cache[kkey] = entry
            node = pick(entry[0], entry[1])
        counts[key] = counts.get(key, 0) + 1
        paths.setdefault(key, triples)
    return {History(paths[key]): count for key, count in counts.items()}
