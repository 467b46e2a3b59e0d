"""Menu preferences, Bellman structure, and gradual-learning diagnostics.

The static side values menus under a finite measure over SEU pairs; the
dynamic side builds utilities from felicity trees by backward induction,
decomposes them back, and checks the axioms that separate the model
classes: dominance, sophistication, the felicity martingale, and the
lottery-stream axioms behind a constant discount factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ._rat import ONE, ZERO, rat, rat_str, rat_sum
from .axioms import Verdict
from .core import (
    Act,
    Belief,
    ClassError,
    ConditioningError,
    DegenerateConsumptionError,
    DomainError,
    InstanceError,
    InvariantError,
    Lottery,
    Menu,
    ModelMisfitError,
    PreconditionError,
    SEUPair,
    ShapeError,
    StateSpace,
    Utility,
    bar_menu,
    eval_act,
    mix,
    same_preference,
)
from .dynamic_model import (
    DynamicModel,
    History,
    SubjectiveState,
    conditional_ascf,
    consistent_weights,
    menu_without_ties,
)

# ---------------------------------------------------------------------------
# one-shot menu preference


@dataclass(frozen=True)
class DLRMeasure:
    """Finite measure over SEU pairs, valuing menus by expected maxima.

    Entries are (SEUPair, weight) with positive weights summing to one.
    Non-redundancy is part of the type: two entries inducing the same
    preference would make the weights meaningless, so they are rejected.
    """

    entries: Tuple[Tuple[SEUPair, object], ...]

    def __post_init__(self):
        entries = tuple((seu, rat(w)) for seu, w in self.entries)
        if not entries:
            raise InvariantError("a menu-preference measure needs support")
        dims = {len(seu.belief) for seu, _ in entries}
        if len(dims) != 1:
            raise ShapeError("support mixes belief dimensions")
        total = ZERO
        for _, w in entries:
            if w <= ZERO:
                raise InvariantError("measure weights must be positive")
            total += w
        if total != ONE:
            raise InvariantError("measure weights do not sum to 1")
        for i, (a, _) in enumerate(entries):
            for b, _ in entries[i + 1 :]:
                if same_preference(a, b):
                    raise InvariantError("two entries induce the same preference")
        object.__setattr__(self, "entries", entries)

    @property
    def n_states(self) -> int:
        return len(self.entries[0][0].belief)


def dlr_value(measure: DLRMeasure, menu: Menu):
    """Weighted sum over the support of the menu's best value per SEU."""
    return rat_sum(
        w * max(eval_act(seu, f) for f in menu) for seu, w in measure.entries
    )


# ---------------------------------------------------------------------------
# felicity trees


@dataclass(frozen=True)
class FelicityNode:
    """Skeleton node: belief, consumption felicity, realized state, kernel.

    Unlike a subjective state, the felicity may be constant — a taste
    that values all consumption equally is a legitimate stage of
    learning, even though the utilities built from it may not be.
    """

    belief: Belief
    felicity: Utility
    state: int
    children: Tuple[Tuple[object, "FelicityNode"], ...] = ()
    _height: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        state = int(self.state)
        if not 0 <= state < len(self.belief):
            raise InvariantError("realized state outside the belief's state space")
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
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "children", children)
        height = 0 if not children else 1 + children[0][1]._height
        object.__setattr__(self, "_height", height)


def _walk_felicity_levels(
    spaces: Tuple[StateSpace, ...], roots: Tuple[Tuple[object, FelicityNode], ...]
) -> List[List[FelicityNode]]:
    levels: List[List[FelicityNode]] = []
    level = [node for _, node in roots]
    for t, space in enumerate(spaces):
        if not level:
            raise InvariantError(f"felicity tree ends before period {t}")
        for node in level:
            if len(node.belief) != len(space):
                raise ShapeError(
                    f"period-{t} felicity node does not match its state space"
                )
        levels.append(level)
        level = [child for node in level for _, child in node.children]
    if level:
        raise InvariantError("felicity tree outlives the final state space")
    return levels


def _validate_primitives(p, leaf_normalization_only: bool) -> None:
    spaces = tuple(p.state_spaces)
    if not spaces:
        raise InvariantError("primitives need at least one period")
    delta = rat(p.delta)
    if not ZERO < delta < ONE:
        raise PreconditionError("discount factor must lie strictly in (0, 1)")
    roots = tuple((rat(w), node) for w, node in p.roots)
    if not roots:
        raise InvariantError("empty root distribution")
    total = ZERO
    for w, _ in roots:
        if w <= ZERO:
            raise InvariantError("root weights must be positive")
        total += w
    if total != ONE:
        raise InvariantError("root weights do not sum to 1")
    levels = _walk_felicity_levels(spaces, roots)
    basis = levels[0][0].felicity.basis()
    for level in levels:
        for node in level:
            if node.felicity.basis() != basis:
                raise InvariantError("felicities do not share a consumption basis")
    for t, level in enumerate(levels):
        terminal = t == len(levels) - 1
        if leaf_normalization_only and not terminal:
            continue
        for node in level:
            if rat_sum(v for _, v in node.felicity.values) != ZERO:
                raise InvariantError(
                    "felicity is not normalized: the uniform consumption "
                    "lottery must be worth 0"
                )
    menus = tuple(tuple(ms) for ms in p.support_menus)
    if len(menus) != len(spaces):
        raise ShapeError("support menus must list one family per period")
    for t, (space, family) in enumerate(zip(spaces, menus)):
        for menu in family:
            if menu.n_states != len(space):
                raise ShapeError(f"period-{t} support menu is on the wrong state space")
    object.__setattr__(p, "state_spaces", spaces)
    object.__setattr__(p, "roots", roots)
    object.__setattr__(p, "delta", delta)
    object.__setattr__(p, "support_menus", menus)


@dataclass(frozen=True)
class EvolvingPrimitives:
    """Felicity tree, discount factor, and the menus worth pricing.

    ``support_menus[t]`` lists the period-t menus the built utilities
    will carry in their consequence basis; period 0 is kept for
    alignment but never priced. Every felicity must value the uniform
    consumption lottery at zero, which pins down the additive
    normalization the Bellman construction would otherwise absorb.
    """

    state_spaces: Tuple[StateSpace, ...]
    roots: Tuple[Tuple[object, FelicityNode], ...]
    delta: object
    support_menus: Tuple[Tuple[Menu, ...], ...]

    def __post_init__(self):
        _validate_primitives(self, leaf_normalization_only=False)

    @property
    def horizon(self) -> int:
        return len(self.state_spaces) - 1


@dataclass(frozen=True)
class GLPrimitives:
    """Terminal tastes on a filtration skeleton, ahead of averaging.

    Only leaf felicities carry content — they are the possible final
    tastes. Interior felicities are placeholders that ``gl_build``
    overwrites with conditional expectations, so only the leaves face
    the uniform-lottery normalization.
    """

    state_spaces: Tuple[StateSpace, ...]
    roots: Tuple[Tuple[object, FelicityNode], ...]
    delta: object
    support_menus: Tuple[Tuple[Menu, ...], ...]

    def __post_init__(self):
        _validate_primitives(self, leaf_normalization_only=True)

    @property
    def horizon(self) -> int:
        return len(self.state_spaces) - 1


def _mean_utility(weighted: Sequence[Tuple[object, Utility]]) -> Utility:
    basis = weighted[0][1].basis()
    return Utility(
        tuple(
            (z, rat_sum(w * u.value(z) for w, u in weighted))
            for z in basis
        )
    )


def gl_build(p: GLPrimitives) -> EvolvingPrimitives:
    """Fill interior felicities with conditional expectations of the leaves.

    The leaf tastes stay as declared; every interior node receives the
    kernel-weighted average of its children's (already averaged)
    felicities, so the output tree is a martingale by construction.
    """

    def rebuild(node: FelicityNode) -> FelicityNode:
        if not node.children:
            return node
        children = tuple((w, rebuild(c)) for w, c in node.children)
        felicity = _mean_utility(tuple((w, c.felicity) for w, c in children))
        return FelicityNode(node.belief, felicity, node.state, children)

    roots = tuple((w, rebuild(node)) for w, node in p.roots)
    return EvolvingPrimitives(p.state_spaces, roots, p.delta, p.support_menus)


# ---------------------------------------------------------------------------
# backward induction


def _continuation_value(children: Tuple[Tuple[object, SubjectiveState], ...], menu: Menu):
    return rat_sum(p * max(eval_act(c.seu, f) for f in menu) for p, c in children)


def bellman_build(p: EvolvingPrimitives) -> DynamicModel:
    """Backward induction from the felicities to a full model.

    Final-period utilities are the terminal felicities; earlier ones
    price (consumption, menu) pairs as felicity plus the discounted
    continuation value of the menu under the node's kernel. Felicities
    that collapse to a constant utility at some node propagate the
    resulting invariant error, since no choice model can carry them.
    """
    spaces = p.state_spaces
    memo: Dict[FelicityNode, SubjectiveState] = {}

    def build(node: FelicityNode, t: int) -> SubjectiveState:
        if node in memo:
            return memo[node]
        if not node.children:
            utility = node.felicity
            children: Tuple[Tuple[object, SubjectiveState], ...] = ()
        else:
            children = tuple((w, build(c, t + 1)) for w, c in node.children)
            menus = p.support_menus[t + 1]
            if not menus:
                raise DomainError(
                    f"period {t + 1} offers no menus to price period-{t} consequences"
                )
            values = {menu: _continuation_value(children, menu) for menu in menus}
            utility = Utility(
                tuple(
                    ((z, menu), node.felicity.value(z) + p.delta * values[menu])
                    for z in node.felicity.basis()
                    for menu in menus
                )
            )
        state = SubjectiveState(node.belief, utility, node.state, children)
        memo[node] = state
        return state

    roots = tuple((w, build(node, 0)) for w, node in p.roots)
    return DynamicModel(spaces, roots, None)


def _model_nodes(model: DynamicModel) -> List[SubjectiveState]:
    seen: List[SubjectiveState] = []
    stack = [node for _, node in model.roots]
    while stack:
        node = stack.pop()
        if node not in seen:
            seen.append(node)
            stack.extend(child for _, child in node.children)
    return seen


def menu_value(model: DynamicModel, node: SubjectiveState, offer):
    """Continuation value of a menu — or an act over menus — at a node.

    A menu is worth the kernel-weighted best value its acts achieve
    under the node's successor states. An act whose lottery consequences
    are themselves menus is priced by averaging those menu values over
    the node's belief about the current objective state.
    """
    if not any(node == n for n in _model_nodes(model)):
        raise DomainError("node does not belong to the model")
    if not node.children:
        raise DomainError("final-period node has no continuation to value")
    if isinstance(offer, Menu):
        return _continuation_value(node.children, offer)
    if isinstance(offer, Act):
        if offer.n_states != len(node.belief):
            raise ShapeError("act does not match the node's state space")
        cache: Dict[Menu, object] = {}
        total = ZERO
        for s, row in enumerate(offer.rows):
            q = node.belief[s]
            if q == ZERO:
                continue
            for c, prob in row.probs:
                if not isinstance(c, Menu):
                    raise DomainError(
                        "extended continuation values price menu consequences only"
                    )
                if c not in cache:
                    cache[c] = _continuation_value(node.children, c)
                total += q * prob * cache[c]
        return total
    raise ClassError(f"menu_value expects a Menu or an Act, not {type(offer).__name__}")


# ---------------------------------------------------------------------------
# Bellman decomposition


def _pair_basis(utility: Utility) -> Optional[Tuple[Tuple[object, Menu], ...]]:
    pairs = []
    for c in utility.basis():
        if not (isinstance(c, tuple) and len(c) == 2 and isinstance(c[1], Menu)):
            return None
        pairs.append(c)
    return tuple(pairs)


def _decompose(model: DynamicModel, delta=None) -> Dict[str, object]:
    """Split every utility into felicity plus discounted continuation.

    Interior utilities must price (consumption, menu) pairs; their
    continuation values are computable from the children directly, so
    the discount factor is the only unknown and every priced pair of
    menus with distinct continuation values votes on it. Returns a
    result record rather than raising, so callers can turn failures
    into verdicts or typed errors as fits their contract.
    """
    if delta is not None:
        delta = rat(delta)
        if not ZERO < delta < ONE:
            raise PreconditionError("declared discount factor must lie in (0, 1)")
    felicity: Dict[SubjectiveState, Utility] = {}
    interior: List[Tuple[SubjectiveState, Tuple[Tuple[object, Menu], ...]]] = []
    for node in _model_nodes(model):
        if not node.children:
            felicity[node] = node.utility
            continue
        pairs = _pair_basis(node.utility)
        if pairs is None:
            return {
                "felicity": felicity,
                "delta": delta,
                "failure": (
                    node,
                    "utility is not a map over (consumption, menu) pairs",
                ),
            }
        interior.append((node, pairs))
    values: Dict[int, Dict[Menu, object]] = {}
    for node, pairs in interior:
        per = {}
        for _, menu in pairs:
            if menu not in per:
                try:
                    per[menu] = _continuation_value(node.children, menu)
                except (DomainError, ShapeError) as exc:
                    return {
                        "felicity": felicity,
                        "delta": delta,
                        "failure": (node, f"menu is not priceable downstream: {exc}"),
                    }
        values[id(node)] = per
    fitted = delta
    if fitted is None:
        for node, pairs in interior:
            per = values[id(node)]
            by_z: Dict[object, List[Menu]] = {}
            for z, menu in pairs:
                by_z.setdefault(z, []).append(menu)
            for z, menus in by_z.items():
                base = menus[0]
                for menu in menus[1:]:
                    gap = per[menu] - per[base]
                    if gap == ZERO:
                        continue
                    cand = (node.utility.value((z, menu)) - node.utility.value((z, base))) / gap
                    if fitted is None:
                        fitted = cand
                    elif cand != fitted:
                        return {
                            "felicity": felicity,
                            "delta": None,
                            "failure": (
                                node,
                                "discount factor is not constant: "
                                f"{rat_str(cand)} vs {rat_str(fitted)}",
                            ),
                        }
        if fitted is not None and not ZERO < fitted < ONE:
            return {
                "felicity": felicity,
                "delta": fitted,
                "failure": (None, f"fitted discount {rat_str(fitted)} lies outside (0, 1)"),
            }
    for node, pairs in interior:
        per = values[id(node)]
        by_z: Dict[object, List[Menu]] = {}
        for z, menu in pairs:
            by_z.setdefault(z, []).append(menu)
        row = []
        for z, menus in by_z.items():
            base = menus[0]
            for menu in menus[1:]:
                gap = per[menu] - per[base]
                residual = node.utility.value((z, menu)) - node.utility.value((z, base))
                if fitted is not None:
                    residual -= fitted * gap
                elif gap != ZERO:
                    residual = None
                if residual is None or residual != ZERO:
                    return {
                        "felicity": felicity,
                        "delta": fitted,
                        "failure": (
                            node,
                            f"no additive felicity fits consumption {z!r}",
                        ),
                    }
            anchor = node.utility.value((z, base))
            if fitted is not None:
                anchor -= fitted * per[base]
            row.append((z, anchor))
        felicity[node] = Utility(tuple(row))
    return {"felicity": felicity, "delta": fitted, "failure": None}


def _felicities(model: DynamicModel, delta=None) -> Tuple[Dict[SubjectiveState, Utility], object]:
    result = _decompose(model, delta)
    if result["failure"] is not None:
        _, note = result["failure"]
        raise ModelMisfitError(f"model does not decompose into felicities: {note}")
    return result["felicity"], result["delta"]


def check_bellman(model: DynamicModel, delta=None) -> Verdict:
    """Whether every utility is felicity plus discounted menu value.

    With no declared discount the factor is fitted from the priced
    menus and reported; residuals are exact, so any mismatch at all
    fails with the offending node.
    """
    result = _decompose(model, delta)
    if result["failure"] is not None:
        witness, note = result["failure"]
        return Verdict("fail", witness=witness if witness is not None else note, note=note)
    fitted = result["delta"]
    if fitted is None:
        return Verdict(
            "pass", note="residual 0; discount unidentified (no continuation variation)"
        )
    label = "declared" if delta is not None else "fitted"
    return Verdict("pass", note=f"residual 0 at {label} discount {rat_str(fitted)}")


# ---------------------------------------------------------------------------
# felicity martingale


def _felicity_transitions(obj, delta):
    """(parent felicity, ((weight, child felicity), ...)) pairs plus units."""
    if isinstance(obj, GLPrimitives):
        raise ClassError("run gl_build before checking raw gradual-learning input")
    if isinstance(obj, EvolvingPrimitives):
        out = []
        stack = [node for _, node in obj.roots]
        while stack:
            node = stack.pop()
            if node.children:
                out.append((node.felicity, tuple((w, c.felicity) for w, c in node.children)))
                stack.extend(c for _, c in node.children)
        return out
    if isinstance(obj, DynamicModel):
        felicity, _ = _felicities(obj, delta)
        out = []
        for node in _model_nodes(obj):
            if node.children:
                out.append(
                    (felicity[node], tuple((w, felicity[c]) for w, c in node.children))
                )
        return out
    raise ClassError(f"no felicities to check on {type(obj).__name__}")


def check_martingale(obj, delta=None) -> Verdict:
    """Whether felicities are conditional expectations of their successors.

    With ``delta`` omitted this is the plain filtration-units identity
    v_t = E[v_{t+1} | theta_t]; passing a discount factor instead checks
    the rescaled form v_t = (1/delta) E[v_{t+1} | theta_t] that
    horizon-discounted felicities satisfy. Exact either way.
    """
    scale = None if delta is None else rat(delta)
    if scale is not None and scale == ZERO:
        raise PreconditionError("discount factor must be nonzero")
    transitions = _felicity_transitions(obj, None)
    checked = 0
    for parent, weighted in transitions:
        basis = parent.basis()
        for _, child in weighted:
            if set(child.basis()) != set(basis):
                return Verdict(
                    "fail",
                    witness=(parent, child),
                    note="felicity bases differ across a transition",
                )
        for z in basis:
            expected = rat_sum(w * child.value(z) for w, child in weighted)
            if scale is not None:
                expected = expected / scale
            residual = parent.value(z) - expected
            if residual != ZERO:
                return Verdict(
                    "fail",
                    witness=(parent, z),
                    note=f"martingale residual {rat_str(residual)} at consumption {z!r}",
                )
        checked += 1
    return Verdict("pass", note=f"martingale residual 0 across {checked} transitions")


# ---------------------------------------------------------------------------
# history-conditional menu preference


def _advanced_frontier(model: DynamicModel, history: History) -> Dict[SubjectiveState, object]:
    """Normalized posterior over the nodes about to choose after a history."""
    if len(history) > model.horizon:
        raise DomainError("history exhausts the model horizon")
    if len(history) == 0:
        front = {node: w for w, node in model.roots}
    else:
        front = {}
        for node, w in consistent_weights(model, history).items():
            for p, child in node.children:
                front[child] = front.get(child, ZERO) + w * p
    total = rat_sum(front.values())
    if total == ZERO:
        raise ConditioningError("conditioning on a zero-probability history")
    return {node: w / total for node, w in front.items()}


def _value_surface(obj, history, menus):
    """Menu-value callable plus probe battery for a measure, model, or oracle."""
    if isinstance(obj, DLRMeasure):
        if history is not None:
            raise DomainError("a one-shot measure has no histories to condition on")
        if menus is None:
            raise InstanceError("supply probe menus alongside a measure")
        return (lambda menu: dlr_value(obj, menu)), tuple(menus)
    if isinstance(obj, DynamicModel):
        front = _advanced_frontier(obj, history if history is not None else History.empty())
        battery = tuple(menus) if menus is not None else _probe_menus(front)

        def value(menu: Menu):
            return rat_sum(
                w * max(eval_act(node.seu, f) for f in menu) for node, w in front.items()
            )

        return value, battery
    if callable(obj):
        if menus is None:
            raise InstanceError("supply probe menus alongside a black-box value")
        return obj, tuple(menus)
    raise ClassError(f"no menu-value surface for {type(obj).__name__}")


def _probe_menus(front: Dict[SubjectiveState, object]) -> Tuple[Menu, ...]:
    """Small deterministic battery priced by every node about to choose."""
    nodes = list(front)
    first = nodes[0].utility.basis()
    common = [c for c in first if all(c in n.utility.basis() for n in nodes[1:])]
    if not common:
        raise InstanceError("consistent nodes price no common consequences")
    common = common[:4]
    n_states = len(nodes[0].belief)
    lots = [Lottery.delta(c) for c in common]
    if len(common) >= 2:
        lots.append(mix(rat("1/2"), lots[0], lots[1]))
    constants = [Act.constant(l, n_states) for l in lots]
    menus = [Menu((c,)) for c in constants]
    if len(constants) >= 2:
        for a, b in itertools.combinations(constants, 2):
            menus.append(Menu((a, b)))
        menus.append(Menu(tuple(constants)))
        if n_states >= 2:
            stair = Act(tuple(lots[s % len(lots)] for s in range(n_states)))
            menus.append(Menu((constants[0], stair)))
    return tuple(menus)


def check_weak_dominance(obj, history=None, menus=None) -> Verdict:
    """Whether flattening each menu to its constant acts never hurts.

    The flattened menu offers every state section of every act as a
    constant act — insurance against taste and state risk — and must be
    weakly preferred whenever the representation averages genuine SEUs.
    """
    value, battery = _value_surface(obj, history, menus)
    for menu in battery:
        flat = bar_menu(menu)
        v_menu = value(menu)
        v_flat = value(flat)
        if v_flat < v_menu:
            return Verdict(
                "fail",
                witness=(menu, flat),
                note=f"menu is worth {rat_str(v_menu)}, its constants {rat_str(v_flat)}",
            )
    return Verdict("pass", note=f"constants dominate on all {len(battery)} menus")


def check_strong_dominance(obj, history=None, menus=None) -> Verdict:
    """Whether adding state-wise dominated acts leaves menus worthless more.

    Candidate additions are assembled from the battery's own lotteries
    (constants first, then state-mixed rows). Whenever some incumbent
    act dominates the candidate constant-menu-wise in every state, the
    extended menu must be worth exactly the same; any strict gain means
    the representation hedges over tastes.
    """
    value, battery = _value_surface(obj, history, menus)
    if not battery:
        raise InstanceError("empty probe battery")
    n_states = battery[0].n_states
    if any(menu.n_states != n_states for menu in battery):
        raise ShapeError("probe battery mixes state spaces")
    lattice: List[Lottery] = []
    for menu in battery:
        for f in menu:
            for row in f.rows:
                if row not in lattice:
                    lattice.append(row)
    section_worth = {
        row: value(Menu((Act.constant(row, n_states),))) for row in lattice
    }
    candidates: List[Act] = [Act.constant(row, n_states) for row in lattice]
    for rows in itertools.product(lattice, repeat=n_states):
        if len(set(rows)) > 1:
            candidates.append(Act(tuple(rows)))
    instances = 0
    for menu in battery:
        base = value(menu)
        for g in candidates:
            if g in menu:
                continue
            if not any(
                all(
                    section_worth[f.rows[s]] >= section_worth[g.rows[s]]
                    for s in range(n_states)
                )
                for f in menu
            ):
                continue
            instances += 1
            extended = Menu(tuple(menu) + (g,))
            v_ext = value(extended)
            if v_ext != base:
                return Verdict(
                    "fail",
                    witness=(menu, extended),
                    note=(
                        f"dominated act lifts the menu from {rat_str(base)} "
                        f"to {rat_str(v_ext)}"
                    ),
                )
    if instances == 0:
        raise InstanceError("battery yields no state-wise dominated extensions")
    return Verdict(
        "pass", note=f"{instances} dominated extensions left menu values unchanged"
    )


def _nested_pairs(battery: Tuple[Menu, ...]):
    for small in battery:
        small_set = frozenset(small)
        for big in battery:
            big_set = frozenset(big)
            if small_set < big_set:
                yield small, big


def check_sophistication(obj, history=None, menus=None, values=None) -> Verdict:
    """Whether extra acts get picked exactly when they raise the menu's value.

    For nested tie-free menus, positive choice mass on the extension
    must coincide with a strict value gain — both directions, exactly.
    Models bring their own values and tie filter; a black-box choice
    oracle needs the battery and a menu-value callable supplied.
    """
    h = history if history is not None else History.empty()
    if isinstance(obj, DynamicModel):
        value, battery = _value_surface(obj, h, menus)
        pairs = [
            (small, big)
            for small, big in _nested_pairs(battery)
            if menu_without_ties(obj, big, h)
        ]

        def extension_mass(small: Menu, big: Menu):
            return rat_sum(
                conditional_ascf(obj, f, big, s, h)
                for f in big
                if f not in small
                for s in range(big.n_states)
            )

    elif isinstance(obj, DLRMeasure):
        raise ClassError("sophistication needs history-conditional choice data")
    else:
        cond = getattr(obj, "cond_ascf", None)
        if cond is None:
            raise ClassError(f"no conditional choice surface on {type(obj).__name__}")
        if menus is None or values is None:
            raise InstanceError(
                "black-box sophistication needs probe menus and a menu-value callable"
            )
        battery = tuple(menus)
        value = values
        pairs = list(_nested_pairs(battery))

        def extension_mass(small: Menu, big: Menu):
            return rat_sum(
                cond(f, big, s, h)
                for f in big
                if f not in small
                for s in range(big.n_states)
            )

    if not pairs:
        raise InstanceError("no nested tie-free menu pairs to probe")
    for small, big in pairs:
        mass = extension_mass(small, big)
        gain = value(big) > value(small)
        if (mass > ZERO) != gain:
            return Verdict(
                "fail",
                witness=(small, big),
                note=(
                    f"extension carries choice mass {rat_str(mass)} while the "
                    f"value gain is {'strict' if gain else 'absent'}"
                ),
            )
    return Verdict("pass", note=f"both directions hold on {len(pairs)} nested pairs")


# ---------------------------------------------------------------------------
# lottery streams and the discount factor


def _stream_means(obj, history) -> Tuple[List[Dict[object, object]], object]:
    """Posterior-mean felicities per period from the first unobserved one.

    Returns one consumption-value map per remaining period plus the
    discount factor (declared for primitives, fitted for models).
    """
    if isinstance(obj, EvolvingPrimitives):
        if history is not None and len(history) != 0:
            raise DomainError(
                "primitives cannot condition on observed choices; build the model first"
            )
        level = {node: w for w, node in obj.roots}
        felicity = lambda node: node.felicity
        children = lambda node: node.children
        delta = obj.delta
    elif isinstance(obj, DynamicModel):
        felicity_map, delta = _felicities(obj)
        if delta is None:
            raise DomainError(
                "discount factor is unidentified: no continuation variation to price streams"
            )
        level = _advanced_frontier(obj, history if history is not None else History.empty())
        felicity = lambda node: felicity_map[node]
        children = lambda node: node.children
    else:
        raise ClassError(f"no felicity stream on {type(obj).__name__}")
    means: List[Dict[object, object]] = []
    while level:
        basis = felicity(next(iter(level))).basis()
        for node in level:
            if set(felicity(node).basis()) != set(basis):
                raise ModelMisfitError("felicity bases differ within a period")
        means.append(
            {z: rat_sum(w * felicity(node).value(z) for node, w in level.items()) for z in basis}
        )
        advanced: Dict[object, object] = {}
        for node, w in level.items():
            for p, child in children(node):
                advanced[child] = advanced.get(child, ZERO) + w * p
        level = advanced
    return means, delta


def identify_delta(obj, history=None):
    """Discount factor read off the indifference mixture between streams.

    Finds the weight eta making (l, m, n, ...) worth the same as the
    stream that repeats the eta-mixture of l and m twice, then returns
    (1 - eta) / eta. Under a felicity martingale this reproduces the
    representation's own discount factor exactly.
    """
    means, delta = _stream_means(obj, history)
    if len(means) < 2:
        raise DomainError("streams need at least two remaining periods")
    v1, v2 = means[0], means[1]
    basis = list(v1)
    if all(v1[z] == v1[basis[0]] for z in basis):
        raise DegenerateConsumptionError(
            "all consumption lotteries are indifferent after this history"
        )
    for l, m in itertools.permutations(basis, 2):
        denom = (v1[l] - v1[m]) + delta * (v2[l] - v2[m])
        if denom == ZERO:
            continue
        eta = (v1[l] - v1[m]) / denom
        if eta == ZERO:
            continue
        return (ONE - eta) / eta
    raise DegenerateConsumptionError(
        "stream values do not separate any pair of consumption prizes"
    )


def _sign(x) -> int:
    return (x > ZERO) - (x < ZERO)


def check_stream_axioms(obj, history=None) -> Verdict:
    """Stationarity, constant trade-off, and impatience on prize streams.

    All three are evaluated exactly on the posterior-mean felicities of
    the remaining periods: rankings of single-prize substitutions must
    not depend on their position, the indifference mixture weight must
    not depend on the prizes or the position, and swapping a better
    prize earlier must strictly help.
    """
    means, delta = _stream_means(obj, history)
    if len(means) < 2:
        raise DomainError("streams need at least two remaining periods")
    basis = list(means[0])
    pairs = [(l, m) for l, m in itertools.combinations(basis, 2)]
    if all(means[0][l] == means[0][m] for l, m in pairs):
        return Verdict(
            "inconclusive",
            note="consumption-degenerate after this history; stream axioms are vacuous",
        )
    for l, m in pairs:
        signs = {_sign(v[l] - v[m]) for v in means}
        if len(signs) > 1:
            return Verdict(
                "fail",
                witness=(l, m),
                note="stream ranking of the pair depends on its position",
            )
    etas = set()
    for k in range(len(means) - 1):
        v1, v2 = means[k], means[k + 1]
        for l, m in pairs:
            denom = (v1[l] - v1[m]) + delta * (v2[l] - v2[m])
            if denom == ZERO:
                continue
            etas.add((v1[l] - v1[m]) / denom)
            if len(etas) > 1:
                return Verdict(
                    "fail",
                    witness=(l, m),
                    note="indifference mixture weight varies across prizes or periods",
                )
    v1, v2 = means[0], means[1]
    for l, m in itertools.permutations(basis, 2):
        if v1[l] > v1[m] and not (v1[l] - v1[m]) > delta * (v2[l] - v2[m]):
            return Verdict(
                "fail",
                witness=(l, m),
                note="postponing the better prize does not hurt",
            )
    return Verdict("pass", note=f"stream axioms hold over {len(means)} periods")


# ---------------------------------------------------------------------------
# learning about taste


def taste_learned(obj, history=None, menus=None) -> bool:
    """Whether the history pins down the next choice's consumption taste.

    Models answer from their felicities: every node still possible
    after the history must carry one and the same taste direction. A
    black-box choice oracle answers through its signature instead:
    choice from constant menus must be deterministic.
    """
    if isinstance(obj, DynamicModel):
        felicity, _ = _felicities(obj)
        front = _advanced_frontier(obj, history if history is not None else History.empty())
        return len({felicity[node].direction_key() for node in front}) == 1
    if isinstance(obj, EvolvingPrimitives):
        if history is not None and len(history) != 0:
            raise DomainError(
                "primitives cannot condition on observed choices; build the model first"
            )
        return len({node.felicity.direction_key() for _, node in obj.roots}) == 1
    cond = getattr(obj, "cond_ascf", None)
    if cond is None:
        raise ClassError(f"no taste diagnostics for {type(obj).__name__}")
    if menus is None:
        raise InstanceError("black-box taste diagnostics need constant probe menus")
    h = history if history is not None else History.empty()
    constant_menus = [menu for menu in menus if all(f.is_constant() for f in menu)]
    if not constant_menus:
        raise InstanceError("no constant menus in the probe battery")
    for menu in constant_menus:
        for f in menu:
            mass = rat_sum(cond(f, menu, s, h) for s in range(menu.n_states))
            if mass != ZERO and mass != ONE:
                return False
    return True


def _certainty_profile(obj) -> Tuple[List[bool], int]:
    """Per-period taste certainty of a gradual-learning agent.

    Entry t answers whether every period-t node already knows the next
    period's taste: all its children carry one felicity direction.
    """
    if isinstance(obj, EvolvingPrimitives):
        levels = _walk_felicity_levels(obj.state_spaces, obj.roots)
        felicity = lambda node: node.felicity
        horizon = obj.horizon
    elif isinstance(obj, DynamicModel):
        try:
            felicity_map, _ = _felicities(obj)
        except ModelMisfitError as exc:
            raise ClassError(f"learning comparison needs gradual-learning agents: {exc}")
        levels = [[node for _, node in obj.roots]]
        while levels[-1][0].children:
            levels.append([c for node in levels[-1] for _, c in node.children])
        felicity = lambda node: felicity_map[node]
        horizon = obj.horizon
    else:
        raise ClassError(f"no learning profile for {type(obj).__name__}")
    verdict = check_martingale(obj)
    if verdict.status != "pass":
        raise ClassError(f"learning comparison needs gradual-learning agents: {verdict.note}")
    profile = []
    for t in range(horizon):
        profile.append(
            all(
                len({felicity(c).direction_key() for _, c in node.children}) == 1
                for node in levels[t]
            )
        )
    return profile, horizon


def learns_faster(agent1, agent2) -> bool:
    """Whether the first agent is taste-certain wherever the second is.

    Certainty at a period means every node there already knows the
    coming taste; the comparison asks for implication at every period
    of a common horizon.
    """
    profile1, horizon1 = _certainty_profile(agent1)
    profile2, horizon2 = _certainty_profile(agent2)
    if horizon1 != horizon2:
        raise PreconditionError("agents live on different horizons")
    return all(c1 or not c2 for c1, c2 in zip(profile1, profile2))
