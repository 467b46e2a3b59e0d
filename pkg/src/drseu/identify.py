"""Recovery of representations from choice oracles.

The inverse problem is posed against a finite candidate universe: finitely
many probes cannot search an uncountable space of evaluation rules, but
they can decide exactly which candidates a choice oracle supports, read
off the joint weights on a separating menu, and walk a tree of separating
histories to read transition kernels. Everything downstream of the oracle
is exact rational arithmetic, so recovery round-trips model-backed
oracles without error; canonicalization and equivalence testing implement
the uniqueness side of the same coin.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ._rat import ONE, ZERO, rat, rat_str, rat_sum
from .core import (
    Act,
    ClassError,
    ConditioningError,
    DataInconsistencyError,
    DomainError,
    InvariantError,
    Lottery,
    Menu,
    PreconditionError,
    SEUPair,
    ShapeError,
    StateSpace,
    Utility,
    mix,
    same_preference,
)
from .dynamic_model import (
    DynamicModel,
    History,
    SubjectiveState,
    _as_history_oracle,
)
from .separation import SeparatingMenu, separating_menu
from .static_model import RSEUModel


# ---------------------------------------------------------------------------
# the hypothesis class


@dataclass(frozen=True)
class CandidateUniverse:
    """Finite hypothesis class of evaluation rules the analyst entertains.

    Candidates must be pairwise distinct as preferences (equal beliefs
    with positively affine utilities count as duplicates) and share one
    state-space dimension.
    """

    seus: Tuple[SEUPair, ...]

    def __post_init__(self):
        seus = tuple(self.seus)
        if not seus:
            raise InvariantError("empty candidate universe")
        n = len(seus[0].belief)
        for pair in seus:
            if len(pair.belief) != n:
                raise ShapeError("candidates mix state-space dimensions")
        for i in range(len(seus)):
            for j in range(i + 1, len(seus)):
                if same_preference(seus[i], seus[j]):
                    raise InvariantError(
                        f"candidates {i} and {j} induce the same preference"
                    )
        object.__setattr__(self, "seus", seus)

    @property
    def n_states(self) -> int:
        return len(self.seus[0].belief)

    def __len__(self) -> int:
        return len(self.seus)

    def __iter__(self):
        return iter(self.seus)


@dataclass(frozen=True)
class ProbeRecord:
    """Where one recovered row of numbers came from.

    ``target`` is the rule whose weights the probe read, ``menu`` and
    ``act`` the separating menu and designated act probed, ``history``
    the conditioning history (None for static reads).
    """

    target: SEUPair
    menu: Menu
    act: Act
    history: Optional[History] = None


@dataclass(frozen=True)
class RecoveredModel:
    """A recovered model together with the probes behind every number.

    ``model`` is a fully validated static or dynamic model, so all the
    target type's invariants hold; ``provenance`` lists one record per
    recovered support element or tree node. Tie-break cascades are not
    recoverable beyond their action on the probed menus (none of which
    carries a tie), so recovered models use the uniform coin.
    """

    model: object
    provenance: Tuple[ProbeRecord, ...]


# ---------------------------------------------------------------------------
# revealed support


def _tilt_rungs(sep: SeparatingMenu, seu: SEUPair, rungs: int):
    """Menus and acts approaching the designated choice, tilted its way.

    Rung j mixes weight 2^-j of a constant perturber into every act: the
    candidate's own act moves toward its best prize, every rival toward
    the uniform lottery, so ties at the limit break in the candidate's
    favor while the probes converge back to the separating menu.
    """
    f = sep.act_for(seu)
    prizes = seu.utility.basis()
    n = f.n_states
    best = max(prizes, key=seu.utility.value)
    toward = {
        g: Act.constant(
            Lottery.delta(best) if g == f else Lottery.uniform(prizes), n
        )
        for g in sep.menu
    }
    for j in range(rungs - 2, rungs + 1):
        alpha = ONE / rat(2 ** j)
        perturbed = {g: mix(alpha, toward[g], g) for g in sep.menu}
        yield Menu(tuple(perturbed[g] for g in sep.menu)), perturbed[f]


def _menu_mass(oracle, f: Act, menu: Menu, n_states: int):
    total = ZERO
    for s in range(n_states):
        p = oracle.ascf(f, menu, s)
        if p < ZERO:
            raise DataInconsistencyError(
                f"oracle reports a negative probability {rat_str(p)}"
            )
        total += p
    return total


def revealed_support(
    oracle, universe: CandidateUniverse, rungs: int = 10
) -> Tuple[SEUPair, ...]:
    """Candidates whose designated act the oracle chooses with positive mass.

    Probes the universe's separating menu; a candidate whose act carries
    zero mass there gets a second chance on perturbed menus tilted in its
    favor, which is exactly the neighborhood escape that distinguishes a
    tie-break artifact from genuine absence. Exact on model-backed
    oracles: the result is the oracle's support intersected with the
    universe (up to preference equivalence).
    """
    sep = separating_menu(universe.seus)
    n = universe.n_states
    members = []
    for seu in universe:
        if _menu_mass(oracle, sep.act_for(seu), sep.menu, n) > ZERO:
            members.append(seu)
            continue
        for rung_menu, rung_act in _tilt_rungs(sep, seu, rungs):
            if _menu_mass(oracle, rung_act, rung_menu, n) > ZERO:
                members.append(seu)
                break
    return tuple(members)


# ---------------------------------------------------------------------------
# static recovery


def recover_static(
    oracle, universe: CandidateUniverse, rungs: int = 10
) -> RecoveredModel:
    """Read a static model off the universe's separating menu.

    The joint weight of (candidate, state) is the oracle's choice mass of
    the designated act at that state — exact, no estimation. Probe rows
    must be additive: the supported rows have to carry the whole unit of
    mass between them, and every number must be a probability.
    """
    states = getattr(oracle, "states", None)
    if states is None:
        raise DomainError("oracle does not expose a state space")
    if len(states) != universe.n_states:
        raise ShapeError("universe does not match the oracle's state space")
    members = revealed_support(oracle, universe, rungs)
    if not members:
        raise DataInconsistencyError("no candidate receives positive mass")
    sep = separating_menu(universe.seus)
    rows = []
    for seu in members:
        row = tuple(
            oracle.ascf(sep.act_for(seu), sep.menu, s) for s in range(len(states))
        )
        if rat_sum(row) == ZERO:
            raise DataInconsistencyError(
                "a candidate admitted through perturbations carries no menu "
                "mass; its weight cannot be read off finitely many probes"
            )
        rows.append(row)
    total = rat_sum(p for row in rows for p in row)
    if total != ONE:
        raise DataInconsistencyError(
            f"probe masses sum to {rat_str(total)}, not 1"
        )
    model = RSEUModel(states, tuple(members), tuple(rows))
    records = tuple(
        ProbeRecord(seu, sep.menu, sep.act_for(seu)) for seu in members
    )
    return RecoveredModel(model, records)


# ---------------------------------------------------------------------------
# dynamic recovery


def recover_kernels(
    oracle,
    universes: Sequence[CandidateUniverse],
    state_spaces: Optional[Sequence[StateSpace]] = None,
) -> RecoveredModel:
    """Recover a tree model by walking separating histories node by node.

    ``universes`` supplies one hypothesis class per period; each must
    cover every rule the oracle can realize in that period. The root
    distribution is read off the period-0 separating menu; each recovered
    node extends its parent's separating history by its own designated
    choice and realized state, and the next period's kernel is read
    conditional on that history. Zero-probability separating histories
    are a conditioning error naming the node, since nothing further can
    be read behind them.
    """
    universes = tuple(universes)
    if not universes:
        raise DomainError("no candidate universes supplied")
    raw = oracle
    oracle = _as_history_oracle(oracle)
    if state_spaces is None:
        if isinstance(raw, DynamicModel):
            spaces = raw.state_spaces
        else:
            spaces = tuple(
                StateSpace(tuple(f"s{i}" for i in range(u.n_states)))
                for u in universes
            )
    else:
        spaces = tuple(state_spaces)
    if len(spaces) != len(universes):
        raise ShapeError("universes do not span the oracle's periods")
    for t, (space, u) in enumerate(zip(spaces, universes)):
        if len(space) != u.n_states:
            raise ShapeError(
                f"period-{t} universe does not match its state space"
            )
    seps = tuple(separating_menu(u.seus) for u in universes)
    records: List[ProbeRecord] = []

    def harvest(history: History, period: int):
        sep = seps[period]
        n = universes[period].n_states
        found = []
        total = ZERO
        for k, seu in enumerate(universes[period]):
            act = sep.act_for(seu)
            masses = []
            for s in range(n):
                p = oracle.cond_ascf(act, sep.menu, s, history)
                if p < ZERO:
                    raise DataInconsistencyError(
                        f"oracle reports a negative probability {rat_str(p)}"
                    )
                total += p
                masses.append(p)
            if any(p > ZERO for p in masses):
                found.append((k, seu, act, masses))
                records.append(ProbeRecord(seu, sep.menu, act, history))
        if total != ONE:
            raise DataInconsistencyError(
                f"period-{period} probe masses sum to {rat_str(total)}, not 1"
            )
        weighted = []
        for k, seu, act, masses in found:
            for s, p in enumerate(masses):
                if p == ZERO:
                    continue
                if period == len(universes) - 1:
                    node = SubjectiveState(seu.belief, seu.utility, s)
                else:
                    h = history.then(sep.menu, act, s)
                    if oracle.history_prob(h) == ZERO:
                        raise ConditioningError(
                            f"separating history for period-{period} "
                            f"candidate {k} at state {s} has zero mass"
                        )
                    node = SubjectiveState(
                        seu.belief, seu.utility, s, harvest(h, period + 1)
                    )
                weighted.append((p, node))
        return tuple(weighted)

    roots = harvest(History.empty(), 0)
    model = DynamicModel(spaces, roots)
    return RecoveredModel(model, tuple(records))


# ---------------------------------------------------------------------------
# canonicalization and equivalence


def _canonical_utility(u: Utility) -> Utility:
    """The affine-class representative the direction key normalizes to."""
    base = u.values[-1][1]
    w = [v - base for _, v in u.values]
    pivot = next((abs(x) for x in w if x != ZERO), None)
    if pivot is None:
        return u
    return Utility(
        tuple((c, x / pivot) for (c, _), x in zip(u.values, w))
    )


def _canonical_node(node: SubjectiveState) -> SubjectiveState:
    return SubjectiveState(
        node.belief,
        _canonical_utility(node.utility),
        node.state,
        tuple((p, _canonical_node(child)) for p, child in node.children),
        node.cascade,
    )


def canonicalize(model):
    """Normalize every utility to its affine-class representative.

    Beliefs, weights, states, cascades, and flags are untouched; only
    utilities move, each to the canonical direction of its positive
    affine class, so canonicalization is idempotent and two equivalent
    models canonicalize to comparable utilities. Collapsing two support
    elements onto one representative is an invariant error, inherited
    from the model constructors.
    """
    if isinstance(model, RSEUModel):
        support = tuple(
            SEUPair(p.belief, _canonical_utility(p.utility)) for p in model.support
        )
        return RSEUModel(
            model.states, support, model.joint, model.cascades, model.flag
        )
    if isinstance(model, DynamicModel):
        roots = tuple((p, _canonical_node(node)) for p, node in model.roots)
        return DynamicModel(model.state_spaces, roots, model.flag)
    raise ClassError("canonicalize expects a static or dynamic model")


_MODEL_CLASSES = ("drseu", "evolving", "gl")


def _affine_scale(u1: Utility, u2: Utility):
    """Scale of the positive affine map u2 = a*u1 + b, or None."""
    if u1.basis() != u2.basis() or u1.direction_key() != u2.direction_key():
        return None
    v1 = [v for _, v in u1.values]
    v2 = [v for _, v in u2.values]
    for x1, x2 in zip(v1, v2):
        if x1 != v1[-1]:
            return (x2 - v2[-1]) / (x1 - v1[-1])
    return None


def _node_matches(n1, n2, alpha_parent, ratio, cls):
    """Yield each feasible global scale ratio extending ``ratio``.

    ``ratio`` threads the evolving-class constraint: the per-period
    utility scales must follow one geometric progression along every
    path, with free per-root starting scales. The gl class pins the
    progression flat; plain drseu ignores scales entirely.
    """
    if n1.belief != n2.belief or n1.state != n2.state:
        return
    alpha = _affine_scale(n1.utility, n2.utility)
    if alpha is None:
        return
    if alpha_parent is not None:
        if cls == "gl" and alpha != alpha_parent:
            return
        if cls == "evolving":
            edge = alpha / alpha_parent
            if ratio is None:
                ratio = edge
            elif ratio != edge:
                return
    yield from _forest_matches(n1.children, n2.children, alpha, ratio, cls)


def _forest_matches(kids1, kids2, alpha_parent, ratio, cls):
    if len(kids1) != len(kids2):
        return
    if not kids1:
        yield ratio
        return
    (w1, n1), rest1 = kids1[0], kids1[1:]
    for i, (w2, n2) in enumerate(kids2):
        if w2 != w1:
            continue
        rest2 = kids2[:i] + kids2[i + 1 :]
        for r in _node_matches(n1, n2, alpha_parent, ratio, cls):
            yield from _forest_matches(rest1, rest2, alpha_parent, r, cls)


def models_equivalent(m1, m2, model_class: str = "drseu") -> bool:
    """Whether two models are the same representation up to uniqueness.

    Static models match when a bijection pairs support elements with
    equal beliefs and joint rows and positively affine utilities; tie
    cascades and declared flags carry no identification content and are
    ignored. Dynamic models match when a tree bijection preserves
    weights, beliefs, and states exactly and relates utilities by
    per-node positive affine maps whose scales obey the declared class:
    free for ``"drseu"``, one geometric progression per path with a
    common ratio for ``"evolving"``, constant along paths for ``"gl"``.
    Mismatched tree shapes are a False verdict, not an error.
    """
    if model_class not in _MODEL_CLASSES:
        raise ClassError(f"unknown model class {model_class!r}")
    if isinstance(m1, RSEUModel) and isinstance(m2, RSEUModel):
        if m1.states != m2.states:
            raise PreconditionError("models live on different state spaces")
        if len(m1.support) != len(m2.support):
            return False
        for i, pair in enumerate(m1.support):
            match = [
                j
                for j, other in enumerate(m2.support)
                if same_preference(pair, other)
                and pair.utility.basis() == other.utility.basis()
            ]
            if len(match) != 1 or m1.joint[i] != m2.joint[match[0]]:
                return False
        return True
    if isinstance(m1, DynamicModel) and isinstance(m2, DynamicModel):
        if m1.state_spaces != m2.state_spaces:
            raise PreconditionError("models live on different state spaces")
        return any(
            True
            for _ in _forest_matches(m1.roots, m2.roots, None, None, model_class)
        )
    raise ClassError("models_equivalent expects two models of one kind")
