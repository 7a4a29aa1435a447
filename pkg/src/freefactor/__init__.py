"""freefactor: finite covers, complete lifts, exact cost arithmetic and
measure-free-factor certificates for free and virtually free groups."""

from .words import Alphabet, GroupHom, Word, is_primitive, is_proper_power, parse_word, reduce
from .covers import CoverGraph, basis_from_tree, fold, make_cover, membership, rewrite_in_basis
from .lifts import complete_lift, cost_ledger, coset_action, multiplicity, verify_free_lift
from .costlab import (
    FiniteAction,
    FiniteRelation,
    FiniteSpace,
    check_free_product,
    cost,
    generated_partition,
    induce_action,
    is_treeing,
    relation_cost,
    restrict_and_check,
)
from .vfree import VFreeGroup, branched_cover_subgroup, complete_lift_vfree, coset_action_vfree, normal_form
from .certify import apply_rule, check_certificate, prove

__version__ = "0.1.0"
