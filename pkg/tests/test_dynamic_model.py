"""Tree models, history conditioning, and the dynamic history axioms."""
from __future__ import annotations

import pytest
from hypothesis import given

from drseu import (
    Act,
    Belief,
    CHIInstance,
    ConditioningError,
    DomainError,
    DynamicModel,
    FunctionHistoryOracle,
    HCONTInstance,
    History,
    InstanceError,
    LHIInstance,
    Lottery,
    Menu,
    MixtureLadder,
    InvariantError,
    RSEUModel,
    SEUPair,
    ShapeError,
    StateSpace,
    SubjectiveState,
    TieBreakCascade,
    Utility,
    conditional_ascf,
    consistent_states,
    consistent_weights,
    deterministic_chain,
    extended_ascf,
    history_prob,
    menu_without_ties,
    mix_history,
    node_ascf,
    revealed_geq,
    run_history_axiom,
    separating_menu,
    simulate_paths,
)

import strategies as sg
from drseu._rat import ONE, ZERO, rat, rat_float
from oracles import hoeffding_gate

S2 = StateSpace(("l", "r"))


def U(**kw) -> Utility:
    return Utility.of(kw)


def const(prize: str, n: int = 2) -> Act:
    return Act.constant(Lottery.delta(prize), n)


CONST_A, CONST_B = const("a"), const("b")
F_BL = Act((Lottery.delta("a"), Lottery.delta("b")))
G_BR = Act((Lottery.delta("b"), Lottery.delta("a")))
V_MIX = Act.constant(Lottery.of({"a": "2/3", "b": "1/3"}), 2)
A1 = Menu((CONST_A, CONST_B))
A0_SEP = Menu((CONST_A, CONST_B))
A0_POOL = Menu((F_BL, G_BR))
T0 = Menu((F_BL, V_MIX))

U_A, U_B = U(a=1, b=0), U(a=0, b=1)
Q_A, Q_B = Belief.of("2/3", "1/3"), Belief.of("1/4", "3/4")
Q_A1, Q_B1 = Belief.of("3/4", "1/4"), Belief.of("1/5", "4/5")

H_SEP = History.of((A0_SEP, CONST_A, 0))
H_POOL = History.of((A0_POOL, F_BL, 0))
H_TIE = History.of((T0, F_BL, 0))


def a_children(u: Utility = U_A):
    return (
        ("3/4", SubjectiveState(Q_A1, u, 0)),
        ("1/4", SubjectiveState(Q_A1, u, 1)),
    )


def b_children(u: Utility = U_B):
    return (
        ("1/5", SubjectiveState(Q_B1, u, 0)),
        ("4/5", SubjectiveState(Q_B1, u, 1)),
    )


def learner(
    root_u_a: Utility = U_A,
    root_u_b: Utility = U_B,
    cascade: TieBreakCascade = None,
    flag: str = "cib",
) -> DynamicModel:
    """Two tastes, beliefs sharpening after one period."""
    kw = {} if cascade is None else {"cascade": cascade}
    return DynamicModel(
        (S2, S2),
        (
            ("1/3", SubjectiveState(Q_A, root_u_a, 0, a_children(), **kw)),
            ("1/6", SubjectiveState(Q_A, root_u_a, 1, a_children(), **kw)),
            ("1/8", SubjectiveState(Q_B, root_u_b, 0, b_children())),
            ("3/8", SubjectiveState(Q_B, root_u_b, 1, b_children())),
        ),
        flag=flag,
    )


@pytest.fixture
def model() -> DynamicModel:
    return learner()


class TestSubjectiveState:
    def test_constant_utility_rejected(self):
        with pytest.raises(InvariantError):
            SubjectiveState(Q_A, U(a=2, b=2), 0)

    def test_state_outside_belief_dimension(self):
        with pytest.raises(InvariantError):
            SubjectiveState(Q_A, U_A, 2)

    def test_state_outside_support_is_allowed_without_flag(self):
        """A wrong-beliefs node may realize a state its belief excludes."""
        node = SubjectiveState(Belief.of(1, 0), U_A, 1)
        assert node.belief[node.state] == ZERO

    def test_child_weights_must_sum_to_one(self):
        with pytest.raises(InvariantError):
            SubjectiveState(
                Q_A, U_A, 0, (("1/2", SubjectiveState(Q_A1, U_A, 0)),)
            )

    def test_child_weights_must_be_positive(self):
        kids = (
            (0, SubjectiveState(Q_A1, U_A, 0)),
            (1, SubjectiveState(Q_A1, U_A, 1)),
        )
        with pytest.raises(InvariantError):
            SubjectiveState(Q_A, U_A, 0, kids)

    def test_sibling_triples_must_differ(self):
        kids = (
            ("1/2", SubjectiveState(Q_A1, U_A, 0)),
            ("1/2", SubjectiveState(Q_A1, U_A, 0)),
        )
        with pytest.raises(InvariantError):
            SubjectiveState(Q_A, U_A, 0, kids)

    def test_siblings_may_share_seu_across_states(self):
        """Same (belief, utility) under different realized states is the
        normal shape of belief-consistent branching."""
        node = SubjectiveState(Q_A, U_A, 0, a_children())
        assert len(node.children) == 2

    def test_shared_seu_siblings_need_one_cascade(self):
        aux = TieBreakCascade((("1/2", SEUPair(Belief.of(1, 0), U_A)),))
        kids = (
            ("1/2", SubjectiveState(Q_A1, U_A, 0, cascade=aux)),
            ("1/2", SubjectiveState(Q_A1, U_A, 1)),
        )
        with pytest.raises(InvariantError):
            SubjectiveState(Q_A, U_A, 0, kids)

    def test_ragged_subtree_heights_rejected(self):
        deep = SubjectiveState(Q_A1, U_A, 0, a_children())
        flat = SubjectiveState(Q_A1, U_A, 1)
        with pytest.raises(InvariantError):
            SubjectiveState(Q_A, U_A, 0, (("1/2", deep), ("1/2", flat)))

    def test_children_share_belief_dimension(self):
        kids = (
            ("1/2", SubjectiveState(Q_A1, U_A, 0)),
            ("1/2", SubjectiveState(Belief.of("1/3", "1/3", "1/3"), U_A, 0)),
        )
        with pytest.raises(ShapeError):
            SubjectiveState(Q_A, U_A, 0, kids)

    def test_seu_view(self):
        node = SubjectiveState(Q_A, U_A, 0)
        assert node.seu == SEUPair(Q_A, U_A)


class TestDynamicModel:
    def test_horizon(self, model):
        assert model.horizon == 1

    def test_root_weights_must_sum_to_one(self):
        with pytest.raises(InvariantError):
            DynamicModel((S2,), (("1/2", SubjectiveState(Q_A, U_A, 0)),))

    def test_root_triples_must_differ(self):
        roots = (
            ("1/2", SubjectiveState(Q_A, U_A, 0)),
            ("1/2", SubjectiveState(Q_A, U_A, 0)),
        )
        with pytest.raises(InvariantError):
            DynamicModel((S2,), roots)

    def test_tree_must_span_every_period(self):
        with pytest.raises(InvariantError):
            DynamicModel((S2, S2), (("1", SubjectiveState(Q_A, U_A, 0)),))

    def test_tree_must_stop_at_the_final_period(self):
        root = SubjectiveState(Q_A, U_A, 0, a_children())
        with pytest.raises(InvariantError):
            DynamicModel((S2,), (("1", root),))

    def test_belief_dimension_checked_per_period(self):
        S3 = StateSpace(("x", "y", "z"))
        root = SubjectiveState(Q_A, U_A, 0, a_children())
        with pytest.raises(ShapeError):
            DynamicModel((S2, S3), (("1", root),))

    def test_unknown_flag(self):
        with pytest.raises(InvariantError):
            DynamicModel(
                (S2,), (("1", SubjectiveState(Q_A, U_A, 0)),), flag="mystery"
            )

    def test_nuc_rejects_state_outside_support(self):
        root = SubjectiveState(Belief.of(1, 0), U_A, 1)
        DynamicModel((S2,), (("1", root),))
        with pytest.raises(InvariantError):
            DynamicModel((S2,), (("1", root),), flag="nuc")

    def test_nuc_checks_every_depth(self):
        kids = (("1", SubjectiveState(Belief.of(0, 1), U_A, 0)),)
        root = SubjectiveState(Q_A, U_A, 0, kids)
        DynamicModel((S2, S2), (("1", root),))
        with pytest.raises(InvariantError):
            DynamicModel((S2, S2), (("1", root),), flag="nuc")

    def test_cib_requires_belief_split(self):
        """Sibling weights under cib are the group weight times the
        belief, state by state."""
        kids = (
            ("1/2", SubjectiveState(Q_A1, U_A, 0)),
            ("1/2", SubjectiveState(Q_A1, U_A, 1)),
        )
        roots = (
            ("2/3", SubjectiveState(Q_A, U_A, 0, kids)),
            ("1/3", SubjectiveState(Q_A, U_A, 1, kids)),
        )
        DynamicModel((S2, S2), roots)
        with pytest.raises(InvariantError):
            DynamicModel((S2, S2), roots, flag="cib")

    def test_cib_accepts_the_learner(self, model):
        assert model.flag == "cib"

    def test_cib_requires_support_coverage(self):
        """A supported state missing from the children breaks cib even
        when the weights that are present look proportional."""
        kids = (("1", SubjectiveState(Q_A1, U_A, 0)),)
        roots = (
            ("2/3", SubjectiveState(Q_A, U_A, 0, kids)),
            ("1/3", SubjectiveState(Q_A, U_A, 1, kids)),
        )
        DynamicModel((S2, S2), roots)
        with pytest.raises(InvariantError):
            DynamicModel((S2, S2), roots, flag="cib")


class TestHistory:
    def test_act_must_belong_to_menu(self):
        with pytest.raises(DomainError):
            History.of((A1, F_BL, 0))

    def test_state_must_fit_the_menu(self):
        with pytest.raises(DomainError):
            History.of((A1, CONST_A, 2))

    def test_then_appends(self):
        assert len(H_POOL.then(A1, CONST_A, 0)) == 2

    def test_iteration(self):
        (menu, act, s), = list(H_SEP)
        assert (menu, act, s) == (A0_SEP, CONST_A, 0)


class TestHistoryProb:
    """Expected values frozen from the brute-force path enumerator."""

    def test_empty_history(self, model):
        assert history_prob(model, History.empty()) == ONE

    def test_forced_choice_gives_state_marginal(self, model):
        h = History.of((Menu((CONST_A,)), CONST_A, 0))
        assert history_prob(model, h) == rat("11/24")

    def test_separating_history_isolates_one_root(self, model):
        assert history_prob(model, H_SEP) == rat("1/3")

    def test_pooling_history_keeps_both_tastes(self, model):
        assert history_prob(model, H_POOL) == rat("11/24")

    def test_two_period_mass(self, model):
        assert history_prob(model, H_POOL.then(A1, CONST_A, 0)) == rat("1/4")

    def test_unchosen_act_gives_zero(self, model):
        assert history_prob(model, History.of((A0_POOL, G_BR, 0))) == ZERO

    def test_tied_menu_splits_by_coin(self, model):
        assert history_prob(model, H_TIE) == rat("7/24")

    def test_cascade_reweights_the_tie(self):
        aux = TieBreakCascade((("1/2", SEUPair(Belief.of(1, 0), U_A)),))
        model = learner(cascade=aux)
        assert history_prob(model, H_TIE) == rat("3/8")
        assert history_prob(model, History.of((T0, V_MIX, 0))) == rat("1/12")

    def test_history_longer_than_horizon(self, model):
        h = H_POOL.then(A1, CONST_A, 0).then(A1, CONST_A, 0)
        with pytest.raises(DomainError):
            history_prob(model, h)

    def test_menu_must_match_the_period_space(self, model):
        wide = Menu((const("a", 3),))
        with pytest.raises(ShapeError):
            history_prob(model, History.of((wide, const("a", 3), 0)))


class TestConditional:
    """Expected values frozen from the brute-force path enumerator."""

    def test_after_separating_history(self, model):
        assert conditional_ascf(model, CONST_A, A1, 0, H_SEP) == rat("3/4")
        assert conditional_ascf(model, CONST_A, A1, 1, H_SEP) == rat("1/4")
        assert conditional_ascf(model, CONST_B, A1, 0, H_SEP) == ZERO

    def test_after_pooling_history(self, model):
        assert conditional_ascf(model, CONST_A, A1, 0, H_POOL) == rat("6/11")
        assert conditional_ascf(model, CONST_B, A1, 0, H_POOL) == rat("3/55")
        assert conditional_ascf(model, CONST_B, A1, 1, H_POOL) == rat("12/55")

    def test_after_tied_history(self, model):
        assert conditional_ascf(model, CONST_A, A1, 0, H_TIE) == rat("3/7")
        assert conditional_ascf(model, CONST_B, A1, 1, H_TIE) == rat("12/35")

    def test_state_labels_resolve(self, model):
        assert conditional_ascf(model, CONST_A, A1, "r", H_SEP) == rat("1/4")

    def test_zero_probability_history(self, model):
        with pytest.raises(ConditioningError):
            conditional_ascf(
                model, CONST_A, A1, 0, History.of((A0_POOL, G_BR, 0))
            )

    def test_probe_beyond_horizon(self, model):
        with pytest.raises(DomainError):
            conditional_ascf(model, CONST_A, A1, 0, H_POOL.then(A1, CONST_A, 0))

    def test_chain_rule(self, model):
        """History mass factors through the conditional, period by period."""
        lhs = history_prob(model, H_POOL.then(A1, CONST_A, 0))
        rhs = history_prob(model, H_POOL) * conditional_ascf(
            model, CONST_A, A1, 0, H_POOL
        )
        assert lhs == rhs

    def test_one_period_model_reduces_to_static(self):
        dyn = DynamicModel(
            (S2,),
            (
                ("1/3", SubjectiveState(Q_A, U_A, 0)),
                ("1/6", SubjectiveState(Q_A, U_A, 1)),
                ("1/8", SubjectiveState(Q_B, U_B, 0)),
                ("3/8", SubjectiveState(Q_B, U_B, 1)),
            ),
            flag="cib",
        )
        static = RSEUModel.cib(
            S2,
            ((SEUPair(Q_A, U_A), "1/2"), (SEUPair(Q_B, U_B), "1/2")),
        )
        for menu in (A0_POOL, T0, A1):
            for f in menu:
                for s in (0, 1):
                    got = conditional_ascf(dyn, f, menu, s, History.empty())
                    assert got == static.ascf(f, menu, s)

    @given(menu=sg.menus(prizes=("a", "b")))
    def test_mass_one_and_chain_rule_on_random_menus(self, menu):
        model = learner()
        total = ZERO
        for f in menu:
            for s in (0, 1):
                mass = conditional_ascf(model, f, menu, s, H_POOL)
                total += mass
                joint = history_prob(model, H_POOL.then(menu, f, s))
                assert joint == mass * rat("11/24")
        assert total == ONE


class TestConsistency:
    def test_separating_history_pins_the_node(self, model):
        (node,) = consistent_states(model, H_SEP)
        assert (node.belief, node.state) == (Q_A, 0)

    def test_separating_menu_module_fixture(self, model):
        """A generated separating menu isolates whichever root chose."""
        sep = separating_menu((SEUPair(Q_A, U_A), SEUPair(Q_B, U_B)))
        act = sep.act_for(SEUPair(Q_B, U_B))
        h = History.of((sep.menu, act, 1))
        (node,) = consistent_states(model, h)
        assert (node.belief, node.state) == (Q_B, 1)

    def test_pooling_history_keeps_two_nodes(self, model):
        weights = consistent_weights(model, H_POOL)
        assert len(weights) == 2
        assert sum(weights.values(), ZERO) == rat("11/24")

    def test_constant_menus_never_exclude(self, model):
        h = History.of((Menu((CONST_A,)), CONST_A, 0))
        assert {n.belief for n in consistent_states(model, h)} == {Q_A, Q_B}

    def test_zero_probability_history_is_empty(self, model):
        assert consistent_states(model, History.of((A0_POOL, G_BR, 0))) == frozenset()

    def test_empty_history_rejected(self, model):
        with pytest.raises(DomainError):
            consistent_states(model, History.empty())

    def test_shared_subtrees_aggregate(self):
        kids = a_children()
        roots = (
            ("1/2", SubjectiveState(Q_A, U_A, 0, kids)),
            ("1/2", SubjectiveState(Q_B, U_B, 0, kids)),
        )
        m = DynamicModel((S2, S2), roots)
        h = History.of((Menu((CONST_A,)), CONST_A, 0)).then(
            Menu((CONST_A,)), CONST_A, 0
        )
        weights = consistent_weights(m, h)
        assert len(weights) == 1
        assert sum(weights.values(), ZERO) == rat("3/4")

    def test_conditional_averages_the_node_rules(self, model):
        """The history-conditional rule is the posterior-weighted average
        of the one-step rules at the consistent nodes."""
        for h in (H_SEP, H_POOL, H_TIE):
            weights = consistent_weights(model, h)
            mass = sum(weights.values(), ZERO)
            for f in A1:
                for s in (0, 1):
                    mixed = ZERO
                    for node, w in weights.items():
                        mixed += w * node_ascf(model, node, f, A1, s)
                    assert mixed / mass == conditional_ascf(model, f, A1, s, h)

    def test_node_ascf_needs_children(self, model):
        leaf = SubjectiveState(Q_A1, U_A, 0)
        with pytest.raises(DomainError):
            node_ascf(model, leaf, CONST_A, A1, 0)

    def test_node_ascf_checks_dimensions(self, model):
        root = model.roots[0][1]
        with pytest.raises(ShapeError):
            node_ascf(model, root, const("a", 3), Menu((const("a", 3),)), 0)
        with pytest.raises(DomainError):
            node_ascf(model, root, CONST_A, A1, 5)


class TestMenuWithoutTies:
    def test_singleton_menu(self, model):
        assert menu_without_ties(model, Menu((V_MIX,)), History.empty())

    def test_generic_menu(self, model):
        assert menu_without_ties(model, A0_SEP, History.empty())

    def test_planted_tie(self, model):
        assert not menu_without_ties(model, T0, History.empty())

    def test_history_can_dissolve_a_tie(self, model):
        """Once the tied taste is excluded, the same menu is tie-free."""
        h = History.of((A0_SEP, CONST_B, 0))
        assert menu_without_ties(model, T0, h)

    def test_second_period_tie(self, model):
        w = Act.constant(Lottery.of({"a": "3/4", "b": "1/4"}), 2)
        tied = Menu((F_BL, w))
        assert not menu_without_ties(model, tied, H_SEP)
        assert menu_without_ties(model, tied, History.of((A0_SEP, CONST_B, 0)))

    def test_zero_probability_history_is_vacuous(self, model):
        h = History.of((A0_POOL, G_BR, 0))
        assert menu_without_ties(model, T0, h)

    def test_beyond_horizon(self, model):
        with pytest.raises(DomainError):
            menu_without_ties(model, A1, H_POOL.then(A1, CONST_A, 0))


class TestRevealedPreference:
    def test_reflexive(self, model):
        assert revealed_geq(model, H_SEP, CONST_A, CONST_A)

    def test_separating_history_orders_totally(self, model):
        assert revealed_geq(model, H_SEP, CONST_A, CONST_B)
        assert not revealed_geq(model, H_SEP, CONST_B, CONST_A)
        assert revealed_geq(model, H_SEP, F_BL, CONST_B)

    def test_disagreement_leaves_both_unranked(self, model):
        assert not revealed_geq(model, H_POOL, CONST_A, CONST_B)
        assert not revealed_geq(model, H_POOL, CONST_B, CONST_A)

    def test_agreement_despite_pooling(self, model):
        """Pooled tastes still rank acts they agree on."""
        dominated = Act.constant(Lottery.of({"a": "1/2", "b": "1/2"}), 2)
        better = Act(
            (Lottery.of({"a": "3/4", "b": "1/4"}), Lottery.of({"a": "1/4", "b": "3/4"}))
        )
        assert revealed_geq(model, H_POOL, better, dominated)

    def test_zero_probability_history(self, model):
        with pytest.raises(ConditioningError):
            revealed_geq(model, History.of((A0_POOL, G_BR, 0)), CONST_A, CONST_B)

    def test_empty_history(self, model):
        with pytest.raises(DomainError):
            revealed_geq(model, History.empty(), CONST_A, CONST_B)


# ---------------------------------------------------------------------------
# the extension and its construction invariance


def chain_consequence(chain: History, period: int):
    return chain.triples[period][1].rows[0].support()[0]


class TestExtendedRule:
    def test_agrees_with_the_ratio_formula(self, model):
        for f in A1:
            for s in (0, 1):
                assert extended_ascf(model, f, A1, s, H_POOL) == conditional_ascf(
                    model, f, A1, s, H_POOL
                )

    def test_unreachable_menu_after_separation(self, model):
        """No act of the separating menu can deliver A1, yet the extension
        equals the one-step rule at the separated node."""
        (node,) = consistent_states(model, H_SEP)
        for f in A1:
            for s in (0, 1):
                got = extended_ascf(model, f, A1, s, H_SEP)
                assert got == node_ascf(model, node, f, A1, s)

    def test_zero_probability_history_still_fails(self, model):
        with pytest.raises(ConditioningError):
            extended_ascf(model, CONST_A, A1, 0, History.of((A0_POOL, G_BR, 0)))

    def test_chain_shape(self):
        h2 = H_POOL.then(A1, CONST_B, 1)
        chain = deterministic_chain(h2, A1, prize="z0")
        assert len(chain) == 2
        for menu, act, _ in chain:
            assert menu == Menu((act,)) and act.is_constant()
        assert chain.triples[0][2] == 0 and chain.triples[1][2] == 1
        prize, target = chain_consequence(chain, 1)
        assert (prize, target) == ("z0", A1)
        _, first_hop = chain_consequence(chain, 0)
        assert first_hop == chain.triples[1][0]

    def test_mixture_weight_range(self):
        d = deterministic_chain(H_POOL, A1)
        with pytest.raises(DomainError):
            mix_history(0, H_POOL, d)
        with pytest.raises(ShapeError):
            mix_history("1/2", H_POOL.then(A1, CONST_A, 0), d)

    def test_construction_invariance_one_period(self):
        """Mixing the history against any chain, at any weight, conditions
        identically -- even when the chain consequences carry junk values."""
        d0 = deterministic_chain(H_POOL, A1, prize="z0")
        d1 = deterministic_chain(H_POOL, A1, prize="z1")
        c0, c1 = chain_consequence(d0, 0), chain_consequence(d1, 0)
        m = learner(
            root_u_a=Utility.of({"a": 1, "b": 0, c0: "1/7", c1: 2}),
            root_u_b=Utility.of({"a": 0, "b": 1, c0: 3, c1: "5/9"}),
            flag=None,
        )
        want = extended_ascf(m, CONST_A, A1, 0, H_POOL)
        assert want == rat("6/11")
        for lam, d in (("1/2", d0), ("1/4", d0), ("2/3", d1), ("1/9", d1)):
            mixed = mix_history(lam, H_POOL, d)
            assert history_prob(m, mixed) == history_prob(m, H_POOL)
            assert conditional_ascf(m, CONST_A, A1, 0, mixed) == want

    def test_construction_invariance_two_periods(self):
        """Nested chains behave the same across a two-period history."""
        A2 = Menu((CONST_A, CONST_B))
        h2 = History.of((A0_SEP, CONST_A, 0), (A1, CONST_A, 1))
        d0 = deterministic_chain(h2, A2, prize="z0")
        d1 = deterministic_chain(h2, A2, prize="z1")
        root_cons = (chain_consequence(d0, 0), chain_consequence(d1, 0))
        mid_cons = (chain_consequence(d0, 1), chain_consequence(d1, 1))
        u_a_root = Utility.of({"a": 1, "b": 0, root_cons[0]: 5, root_cons[1]: -2})
        u_b_root = Utility.of({"a": 0, "b": 1, root_cons[0]: -1, root_cons[1]: 4})
        u_a_mid = Utility.of({"a": 1, "b": 0, mid_cons[0]: "1/3", mid_cons[1]: 7})
        u_b_mid = Utility.of({"a": 0, "b": 1, mid_cons[0]: 2, mid_cons[1]: "3/8"})
        q2a, q2b = Belief.of("1/2", "1/2"), Belief.of("3/5", "2/5")
        grand_a = (("1/2", SubjectiveState(q2a, U_A, 0)),
                   ("1/2", SubjectiveState(q2a, U_A, 1)))
        grand_b = (("3/5", SubjectiveState(q2b, U_B, 0)),
                   ("2/5", SubjectiveState(q2b, U_B, 1)))
        mid_a = (("3/4", SubjectiveState(Q_A1, u_a_mid, 0, grand_a)),
                 ("1/4", SubjectiveState(Q_A1, u_a_mid, 1, grand_a)))
        mid_b = (("1/5", SubjectiveState(Q_B1, u_b_mid, 0, grand_b)),
                 ("4/5", SubjectiveState(Q_B1, u_b_mid, 1, grand_b)))
        deep = DynamicModel(
            (S2, S2, S2),
            (
                ("1/3", SubjectiveState(Q_A, u_a_root, 0, mid_a)),
                ("1/6", SubjectiveState(Q_A, u_a_root, 1, mid_a)),
                ("1/8", SubjectiveState(Q_B, u_b_root, 0, mid_b)),
                ("3/8", SubjectiveState(Q_B, u_b_root, 1, mid_b)),
            ),
        )
        assert history_prob(deep, h2) == rat("1/12")
        want = extended_ascf(deep, CONST_A, A2, 0, h2)
        assert want == rat("1/2")
        for lam, d in (("1/2", d0), ("1/4", d0), ("2/3", d1)):
            mixed = mix_history(lam, h2, d)
            assert history_prob(deep, mixed) == rat("1/12")
            assert conditional_ascf(deep, CONST_A, A2, 0, mixed) == want


# ---------------------------------------------------------------------------
# history axioms


def model_oracle_pair(model):
    return FunctionHistoryOracle(
        cond=lambda f, m, s, h: conditional_ascf(model, f, m, s, h),
        prob=lambda h: history_prob(model, h),
    )


PROBES_1 = ((CONST_A, A1, 0), (CONST_B, A1, 1))


class TestCHI:
    def test_passes_on_the_model(self, model):
        instance = CHIInstance(
            H_SEP, 0, Menu((CONST_A, CONST_B, V_MIX)), PROBES_1
        )
        assert run_history_axiom("CHI", model, (instance,)).passed

    def test_passes_with_cascade_ties(self):
        """Growing a tied menu by an act both tastes reject moves nothing,
        before or after the surgery period."""
        aux = TieBreakCascade((("1/2", SEUPair(Belief.of(1, 0), U_A)),))
        m = learner(cascade=aux)
        loser = Act.constant(Lottery.of({"a": "2/5", "b": "3/5"}), 2)
        instance = CHIInstance(H_TIE, 0, Menu((F_BL, V_MIX, loser)), PROBES_1)
        assert conditional_ascf(m, CONST_A, A1, 0, H_TIE) == rat("1/2")
        assert run_history_axiom("CHI", m, (instance,)).passed

    def test_mass_moving_surgery_is_rejected(self, model):
        bigger = Menu((F_BL, G_BR, CONST_A))
        instance = CHIInstance(H_POOL, 0, bigger, PROBES_1)
        with pytest.raises(InstanceError):
            run_history_axiom("CHI", model, (instance,))

    def test_non_nested_surgery_is_rejected(self):
        with pytest.raises(InstanceError):
            CHIInstance(H_POOL, 0, Menu((F_BL, CONST_A)), PROBES_1)

    def test_period_out_of_range(self):
        with pytest.raises(InstanceError):
            CHIInstance(H_POOL, 1, Menu((F_BL, G_BR, CONST_A)), PROBES_1)

    def test_zero_probability_history_is_rejected(self, model):
        h = History.of((A0_POOL, G_BR, 0))
        instance = CHIInstance(h, 0, Menu((F_BL, G_BR)), PROBES_1)
        with pytest.raises(InstanceError):
            run_history_axiom("CHI", model, (instance,))

    def test_planted_downstream_disagreement(self, model):
        larger = Menu((CONST_A, CONST_B, V_MIX))
        instance = CHIInstance(H_SEP, 0, larger, PROBES_1)
        surgered = instance.surgered()

        def cond(f, m, s, h):
            if h == surgered and (f, m, s) == PROBES_1[0]:
                return 0
            return conditional_ascf(model, f, m, s, h)

        oracle = FunctionHistoryOracle(
            cond=cond, prob=lambda h: history_prob(model, h)
        )
        verdict = run_history_axiom("CHI", oracle, (instance,))
        assert verdict.status == "fail"
        assert verdict.witness["axiom"] == "CHI"
        assert verdict.witness["lhs"] == rat("3/4")

    def test_instance_type_checked(self, model):
        lhi = LHIInstance(H_POOL, 0, A0_SEP, "1/2", PROBES_1)
        with pytest.raises(InstanceError):
            run_history_axiom("CHI", model, (lhi,))

    def test_unknown_axiom(self, model):
        with pytest.raises(DomainError):
            run_history_axiom("CONT", model, ())


class TestLHI:
    def test_passes_on_the_model(self, model):
        instances = (
            LHIInstance(H_POOL, 0, A0_SEP, "1/2", PROBES_1),
            LHIInstance(H_POOL, 0, Menu((V_MIX,)), "1/3", PROBES_1),
        )
        assert run_history_axiom("LHI", model, instances).passed

    def test_passes_with_cascade_ties(self):
        aux = TieBreakCascade((("1/2", SEUPair(Belief.of(1, 0), U_A)),))
        m = learner(cascade=aux)
        instance = LHIInstance(H_TIE, 0, Menu((CONST_A,)), "1/2", PROBES_1)
        assert run_history_axiom("LHI", m, (instance,)).passed

    def test_degenerate_weight_passes(self, model):
        instance = LHIInstance(H_POOL, 0, A0_SEP, 1, PROBES_1)
        assert run_history_axiom("LHI", model, (instance,)).passed

    def test_weight_validation(self):
        with pytest.raises(InstanceError):
            LHIInstance(H_POOL, 0, A0_SEP, 0, PROBES_1)
        with pytest.raises(InstanceError):
            LHIInstance(H_POOL, 0, A0_SEP, "3/2", PROBES_1)

    def test_zero_probability_history_is_rejected(self, model):
        h = History.of((A0_POOL, G_BR, 0))
        instance = LHIInstance(h, 0, A0_SEP, "1/2", PROBES_1)
        with pytest.raises(InstanceError):
            run_history_axiom("LHI", model, (instance,))

    def test_all_variants_dead_is_rejected(self, model):
        instance = LHIInstance(H_POOL, 0, A0_SEP, "1/2", PROBES_1)
        oracle = FunctionHistoryOracle(
            cond=lambda f, m, s, h: conditional_ascf(model, f, m, s, h),
            prob=lambda h: history_prob(model, h) if h == H_POOL else 0,
        )
        with pytest.raises(InstanceError):
            run_history_axiom("LHI", oracle, (instance,))

    def test_planted_average_violation(self, model):
        instance = LHIInstance(H_POOL, 0, A0_SEP, "1/2", PROBES_1)
        victim = instance.variants()[0]

        def cond(f, m, s, h):
            if h == victim and (f, m, s) == PROBES_1[0]:
                return 1
            return conditional_ascf(model, f, m, s, h)

        oracle = FunctionHistoryOracle(
            cond=cond, prob=lambda h: history_prob(model, h)
        )
        verdict = run_history_axiom("LHI", oracle, (instance,))
        assert verdict.status == "fail"
        assert verdict.witness["axiom"] == "LHI"


def two_sided_ladders():
    toward_a = MixtureLadder((((F_BL, CONST_A), (V_MIX, CONST_B)),))
    toward_b = MixtureLadder((((F_BL, CONST_B), (V_MIX, CONST_A)),))
    return toward_a, toward_b


class TestHCONT:
    def test_tie_free_history_brackets_itself(self, model):
        ladder = MixtureLadder((((CONST_A, CONST_A), (CONST_B, CONST_B)),))
        instance = HCONTInstance(H_SEP, PROBES_1, (ladder,))
        assert run_history_axiom("HCONT", model, (instance,)).passed

    def test_tied_history_sits_inside_the_hull(self, model):
        """Perturbing the tie both ways gives limits 6/11 and 0; the tied
        value 3/7 lies between them."""
        instance = HCONTInstance(H_TIE, ((CONST_A, A1, 0),), two_sided_ladders())
        assert run_history_axiom("HCONT", model, (instance,)).passed

    def test_black_box_outside_the_hull_fails(self, model):
        instance = HCONTInstance(H_TIE, ((CONST_A, A1, 0),), two_sided_ladders())

        def cond(f, m, s, h):
            if h == H_TIE:
                return "9/10"
            return conditional_ascf(model, f, m, s, h)

        oracle = FunctionHistoryOracle(
            cond=cond, prob=lambda h: history_prob(model, h)
        )
        verdict = run_history_axiom("HCONT", oracle, (instance,))
        assert verdict.status == "fail"
        assert verdict.witness["axiom"] == "HCONT"
        assert verdict.witness["low"] == ZERO
        assert verdict.witness["high"] == rat("6/11")

    def test_tie_preserving_ladder_is_inadmissible(self, model):
        """A perturbation that translates the tied pair in lockstep never
        enters the tie-free region, so the model check reports nothing."""
        ladder = MixtureLadder((((F_BL, V_MIX), (V_MIX, V_MIX)),))
        instance = HCONTInstance(H_TIE, ((CONST_A, A1, 0),), (ladder,))
        verdict = run_history_axiom("HCONT", model, (instance,))
        assert verdict.status == "inconclusive"

    def test_unstable_black_box_is_inconclusive(self, model):
        drift = iter(range(3, 1000))

        def cond(f, m, s, h):
            if h == H_TIE:
                return conditional_ascf(model, f, m, s, h)
            return rat(1) / rat(next(drift))

        oracle = FunctionHistoryOracle(
            cond=cond, prob=lambda h: history_prob(model, h)
        )
        instance = HCONTInstance(H_TIE, ((CONST_A, A1, 0),), two_sided_ladders())
        verdict = run_history_axiom("HCONT", oracle, (instance,))
        assert verdict.status == "inconclusive"

    def test_ladder_validation(self):
        with pytest.raises(InstanceError):
            MixtureLadder((((F_BL, CONST_A), (V_MIX, CONST_B)),), rungs=3)
        with pytest.raises(InstanceError):
            MixtureLadder((((F_BL, G_BR), (V_MIX, CONST_B)),))
        with pytest.raises(InstanceError):
            HCONTInstance(
                H_TIE,
                PROBES_1,
                (MixtureLadder((((F_BL, CONST_A),),)),),
            )
        with pytest.raises(InstanceError):
            HCONTInstance(H_POOL.then(A1, CONST_A, 0), PROBES_1, two_sided_ladders())


# ---------------------------------------------------------------------------
# simulation


def pair_learner():
    """Learner whose period-0 acts deliver (prize, continuation menu)."""
    short = Menu((CONST_A,))
    F = Act.constant(Lottery.of({("a", A1): "3/4", ("b", short): "1/4"}), 2)
    G = Act.constant(Lottery.delta(("b", A1)), 2)
    u_a0 = Utility.of({("a", A1): 1, ("b", short): 0, ("b", A1): 0})
    u_b0 = Utility.of({("a", A1): 0, ("b", short): 1, ("b", A1): 1})
    return learner(root_u_a=u_a0, root_u_b=u_b0), Menu((F, G))


def sample_distribution(model, menu0):
    """Exact distribution the sampler targets: choice mass times the
    arrival mass of each period's menu."""
    out = {}

    def arrivals(act, s):
        table = {}
        for c, p in act.rows[s].probs:
            _, menu = c
            table[menu] = table.get(menu, ZERO) + p
        return table

    def expand(prefix, menu, arrival):
        t = len(prefix)
        for f in menu:
            for s in range(menu.n_states):
                h = prefix.then(menu, f, s)
                if history_prob(model, h) == ZERO:
                    continue
                if t == model.horizon:
                    out[h] = history_prob(model, h) * arrival
                    continue
                for nxt, p in arrivals(f, s).items():
                    expand(h, nxt, arrival * p)

    expand(History.empty(), menu0, ONE)
    return out


class TestSimulation:
    def test_counts_total(self):
        model, menu0 = pair_learner()
        counts = simulate_paths(model, menu0, 500, seed=11)
        assert sum(counts.values()) == 500

    def test_same_seed_reproduces(self):
        model, menu0 = pair_learner()
        assert simulate_paths(model, menu0, 300, seed=5) == simulate_paths(
            model, menu0, 300, seed=5
        )

    def test_frequencies_match_the_exact_distribution(self):
        """Empirical history frequencies sit within the Hoeffding gate of
        the exact choice-times-arrival masses."""
        model, menu0 = pair_learner()
        exact = sample_distribution(model, menu0)
        assert sum(exact.values(), ZERO) == ONE
        n = 20_000
        counts = simulate_paths(model, menu0, n, seed=2)
        assert set(counts) <= set(exact)
        gate = hoeffding_gate(n)
        for h, mass in exact.items():
            assert abs(counts.get(h, 0) / n - rat_float(mass)) <= gate

    def test_every_sampled_history_has_positive_mass(self):
        model, menu0 = pair_learner()
        for h in simulate_paths(model, menu0, 400, seed=3):
            assert history_prob(model, h) > ZERO

    def test_midstream_prize_is_rejected(self, model):
        with pytest.raises(DomainError):
            simulate_paths(model, A0_POOL, 10, seed=0)

    def test_sample_size_validated(self):
        model, menu0 = pair_learner()
        with pytest.raises(DomainError):
            simulate_paths(model, menu0, 0)

    def test_menu_shape_validated(self):
        model, _ = pair_learner()
        with pytest.raises(ShapeError):
            simulate_paths(model, Menu((const("a", 3),)), 10)
