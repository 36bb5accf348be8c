import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcomplete.errors import (
    IdCollision,
    InconsistentUnion,
    InvalidCompletion,
    InvalidInstance,
    UnknownEntity,
)
from netcomplete.model import (
    Completion,
    EntityType,
    Instance,
    MetabolicNetwork,
    Reaction,
    boundary_compounds,
    expand_reversible,
    expanded_targets,
    extend,
    fold_fluxes,
    union_networks,
)

METS = ["A", "B", "C", "D"]


@st.composite
def networks(draw, prefix="r"):
    n = draw(st.integers(0, 5))
    reactions = []
    for i in range(n):
        reactants = draw(st.dictionaries(st.sampled_from(METS), st.integers(1, 3), max_size=2))
        products = draw(st.dictionaries(st.sampled_from(METS), st.integers(1, 3), max_size=2))
        reactions.append(Reaction(f"{prefix}{i}", reactants, products, 0, draw(st.sampled_from([1, 10]))))
    return MetabolicNetwork.from_reactions(reactions)


class TestReaction:
    def test_rejects_negative_bounds(self):
        with pytest.raises(ValueError):
            Reaction("r", {"A": 1}, {}, -1, 5)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            Reaction("r", {"A": 1}, {}, 6, 5)

    def test_rejects_nonpositive_coefficient(self):
        with pytest.raises(ValueError):
            Reaction("r", {"A": 0}, {})

    def test_rejects_bad_identifier(self):
        with pytest.raises(ValueError):
            Reaction("1r", {}, {"A": 1})

    def test_equality_compares_definitions(self):
        assert Reaction("r", {"A": 1}) == Reaction("r", {"A": 1.0})
        assert Reaction("r", {"A": 1}) != Reaction("r", {"B": 2})
        assert hash(Reaction("r", {"A": 1})) == hash(Reaction("r", {"B": 2}))

    def test_metabolites(self):
        assert Reaction("r", {"A": 1}, {"B": 2}).metabolites == {"A", "B"}


class TestNetwork:
    def test_duplicate_ids(self):
        with pytest.raises(IdCollision):
            MetabolicNetwork.from_reactions([Reaction("r", {"A": 1}), Reaction("r", {"B": 1})])

    def test_undeclared_metabolite(self):
        with pytest.raises(UnknownEntity):
            MetabolicNetwork(frozenset({"A"}), {"r": Reaction("r", {"A": 1}, {"B": 1})})

    def test_producers_and_consumers(self, toy):
        assert toy.draft.producers["C"] == ("r4",)
        assert toy.draft.consumers["C"] == ("r2", "r5")
        assert toy.draft.stoichiometry[("r4", "C")] == 2

    def test_without_reactions_drops_orphans(self):
        net = MetabolicNetwork.from_reactions([Reaction("a", {}, {"A": 1}), Reaction("b", {"A": 1}, {"B": 1})])
        assert net.without_reactions(["b"]).metabolites == {"A"}

    def test_boundary_compounds(self, toy):
        assert boundary_compounds(toy.draft) == {"S1", "S2"}


class TestInstance:
    def test_toy_shape(self, toy):
        assert toy.reference_only == ("r6", "r7", "r8", "r9")
        assert toy.targets == {"r5"}
        assert toy.seeds == {"S1", "S2", "S3"}
        assert toy.objectives == {"r5"}
        assert toy.target_compounds == {"A", "C"}

    def test_typing(self, toy):
        assert toy.metabolite_types["A"] is EntityType.TARGET
        assert toy.metabolite_types["S1"] is EntityType.SEED
        assert toy.metabolite_types["G"] is EntityType.REFERENCE
        assert toy.reaction_types["r9"] is EntityType.REFERENCE
        assert toy.typing[("reaction", "r5")] is EntityType.TARGET

    def test_seed_outside_draft(self, toy):
        with pytest.raises(InvalidInstance):
            Instance(toy.draft, toy.reference, {"G"}, toy.targets)

    def test_target_outside_draft(self, toy):
        with pytest.raises(InvalidInstance):
            Instance(toy.draft, toy.reference, toy.seeds, {"r6"})

    def test_boundary_must_be_seed(self, toy):
        with pytest.raises(InvalidInstance):
            Instance(toy.draft, toy.reference, {"S1", "S3"}, toy.targets)

    def test_extend(self, toy):
        net = extend(toy, Completion({"r6", "r9"}))
        assert {"r6", "r9"} <= set(net.reactions)
        assert "G" in net.metabolites

    def test_extend_rejects_foreign(self, toy):
        with pytest.raises(InvalidCompletion):
            extend(toy, ["r1"])
        with pytest.raises(InvalidCompletion):
            extend(toy, ["nope"])


class TestUnion:
    def test_conflict(self):
        g1 = MetabolicNetwork.from_reactions([Reaction("r", {"A": 1})])
        g2 = MetabolicNetwork.from_reactions([Reaction("r", {"A": 2})])
        with pytest.raises(InconsistentUnion):
            union_networks(g1, g2)

    @settings(max_examples=60, deadline=None)
    @given(networks("a"), networks("b"))
    def test_commutative(self, g1, g2):
        assert union_networks(g1, g2) == union_networks(g2, g1)

    @settings(max_examples=40, deadline=None)
    @given(networks())
    def test_idempotent(self, g):
        assert union_networks(g, g) == g


class TestReversible:
    def test_expand_and_fold(self):
        net = MetabolicNetwork.from_reactions([Reaction("r", {"A": 1}, {"B": 1}, 0, 5, reversible=True)])
        x = expand_reversible(net)
        assert set(x.reactions) == {"r__fwd", "r__rev"}
        assert x.reactions["r__rev"].reactants == {"B": 1}
        assert expanded_targets(x, ["r"]) == {"r__fwd"}
        assert fold_fluxes(x, {"r__fwd": 1.0, "r__rev": 3.0}) == {"r": -2.0}

    def test_noop_without_reversible(self, toy):
        assert expand_reversible(toy.draft) is toy.draft

    def test_collision(self):
        net = MetabolicNetwork.from_reactions(
            [Reaction("r", {"A": 1}, {}, reversible=True), Reaction("r__fwd", {"A": 1})]
        )
        with pytest.raises(IdCollision):
            expand_reversible(net)
