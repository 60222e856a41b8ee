"""Toolkit for finite relational structures: satisfaction and homomorphism
counting, interpretation schemes between signatures, structure-sequence
recipes, and empirical certification of polynomial counting growth."""

from .canon import canonical_form
from .counting import (
    CountReport,
    hom,
    hom_count,
    ind,
    ind_count,
    inj,
    inj_count,
    mobius,
    quotient,
    set_partitions,
    super_patterns,
)
from .errors import (
    BindingError,
    BudgetError,
    FormulaParseError,
    SignatureError,
    ToolkitError,
    UnboundedDegreeError,
    ValidationError,
)
from .interp import (
    ClassCertificate,
    GraphicalScheme,
    InterpretationScheme,
    QuotientScheme,
    apply_graphical,
    apply_interpretation,
    apply_interpretation_with_map,
    apply_quotient,
    apply_quotient_with_report,
    apply_scheme,
    complement_scheme,
    compose,
    forget_orientation_scheme,
    identity_scheme,
    mark_scheme,
    merge_marked_schemes,
    parse_scheme,
    product_scheme,
    scheme_to_text,
    translate_formula,
)
from .logic import (
    Formula,
    HomBasis,
    build_formula,
    count_satisfying,
    eval_formula,
    formula_to_text,
    parse_formula,
    qf_to_hom_basis,
    satisfying_tuples,
    to_dnf,
)
from .polynomials import IntPolynomial, from_binomial, interpolate, parse_polynomial
from .sequences import (
    BasicSeq,
    CopiesSeq,
    CustomSeq,
    InterpretedSeq,
    OrderedSumSeq,
    PolynomialFit,
    ReindexedSeq,
    SequenceSpec,
    StrongSumSeq,
    constant_seq,
    custom_seq,
    detect_polynomial,
    domain_degree,
    generate_term,
    is_nice,
    ordered_splits,
    ordered_sum,
    predict_inj_into_ordered_sum,
    product_sequences,
    signature_of,
    spec_from_json,
    spec_to_json,
    strict_nice_partition,
    telescoped_inj,
)
from .structures import (
    GRAPH_SIG,
    BasicStructureSpec,
    Signature,
    Structure,
    adapt_signature,
    basic_signature,
    build_basic,
    build_marked_vertex,
    build_transitive_tournament,
    copies,
    disjoint_union,
    forget,
    induced,
    isomorphic,
    lift,
    make_structure,
    mark,
    merge,
    permute,
    sig,
    strong_sum,
    structure_from_json,
    structure_to_json,
    weakly_isomorphic,
)

__version__ = "0.1.0"
