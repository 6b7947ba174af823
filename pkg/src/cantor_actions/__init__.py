"""Finite-depth computations with group actions on Cantor sets given by group chains."""

from .clopen import Clopen, translate_clopen
from .fullgroup import (
    CoeCertificate,
    PiecewiseElement,
    ReturnEquivCertificate,
    apply_piecewise,
    coe_check,
    compose_piecewise,
    express_in_full_group,
    identity_matching,
    invert_piecewise,
    restricted_holonomy,
    return_equivalence_check,
    twist_action,
    validate_piecewise,
)
from .gallery import (
    AutomatonSpec,
    NonTransitiveError,
    adding_machine_spec,
    build_automaton_group,
    build_dihedral,
    build_grigorchuk,
    build_heisenberg,
    build_odometer,
    build_product_toy,
    cyclic_table,
    export_tree,
    grigorchuk_spec,
    klein_table,
    standard_gallery,
    tree_cell,
    tree_path,
)
from .model import (
    BudgetExceeded,
    ChainModel,
    GeneratorAlphabet,
    InvalidInput,
    LevelPermutation,
    PathPoint,
    generated_group,
    group_exponent,
    inverse_word,
    iter_reduced_words,
    kernel_words,
    level_image,
    model_from_tables,
    reduce_word,
    stabilizer_member,
    validate_chain,
)
from .regularity import (
    ascending_chain_probe,
    fixed_cylinder_set,
    germ_hausdorff_witness,
    is_adapted,
    kernel_normality_check,
    lqa_violation_search,
    topological_freeness_check,
    verify_witness,
)

__version__ = "0.1.0"
