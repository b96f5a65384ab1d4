"""Groups presented by L-system relator languages.

The package splits into value modules and algorithm modules:

- words: free-monoid and free-group words, morphisms, endomorphisms
- automata: DFAs and control languages for derivation sequences
- lsystems: deterministic L-systems (five flavours) and conversions
- cfg: context-free grammars, membership, pumping decompositions
- presentations: marked presentations whose relators form a language
- nilpotent: polycyclic presentations and nilpotent quotients
- quotients: quotient tests against finite and nilpotent targets
- hall: a centre-by-metabelian group with exact central arithmetic
- halting: machine-encoded central words and probe verdicts
- formats: text serialization for every value the CLI touches
- fixtures: small example systems, grammars, groups, machines
- cli: the `lgroup` command line front end

Word formatting lives in two places on purpose: `words.format_group_word`
is the bare renderer, `formats.format_word` / `formats.format_group_word`
add the guard against a declared letter literally named `eps`.  Neither
pair is re-exported here; import from the module you mean.
"""

from .words import (
    GroupEndomorphism,
    MonoidMorphism,
    commutator,
    free_reduce,
    group_pow,
    inverse_closure,
    invert,
    left_normed_commutator,
    parse_group_word,
    parse_monoid_word,
)
from .automata import ControlLanguage, Dfa, letter_tracking_dfa, product
from .lsystems import (
    ControlledEdt0l,
    Dt0lSystem,
    Dtf0lSystem,
    Edt0lSystem,
    Hdt0lSystem,
    dtf0l_fin_to_edt0l,
    edt0l_to_hdt0l,
    eliminate_control,
    enumerate_words,
    group_substitution,
    hdt0l_to_edt0l,
)
from .cfg import (
    Cfg,
    PumpingDecomposition,
    cf_shrink_step,
    cfg_contains,
    pumping_constant,
    pumping_decompose,
)
from .presentations import (
    FiniteRelators,
    LPresentation,
    MarkedPresentation,
    edt0l_to_lpresentation,
    lpresentation_to_dtf0l_fin,
    relators,
    tietze_eliminate,
)
from .nilpotent import (
    BudgetExceeded,
    PcPresentation,
    abelianization,
    consistency_check,
    free_nilpotent_wp,
    hirsch_length,
    layer_ranks,
    marked_quotient_nilpotent,
    nilpotent_quotient,
    pc_wp,
)
from .quotients import (
    FiniteGroup,
    FiniteTarget,
    NilpotentClass,
    StabilizedQuotient,
    edt0l_nilpotent_quotient,
    finite_quotient_test,
    marked_quotient_edt0l_nilpotent,
    stabilize_nonterminals,
)
from .hall import (
    HallElement,
    NotCentralPower,
    central_f_coordinates,
    central_word,
    hall_commutator,
    hall_from_word,
    hall_inv,
    hall_mul,
    hall_pow,
    in_lower_central,
    matrix_model,
    matrix_of_element,
    pi1_edt0l,
    pi2_edt0l,
    truncated_presentation,
    verify_f_k,
)
from .halting import (
    Halted,
    MachineList,
    NontrivialUpToBudget,
    Running,
    Trivial,
    TuringMachine,
    gamma_probe,
    h_center_wp,
    h_wp,
    run_tm,
)
from .formats import FormatError

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "Cfg",
    "ControlLanguage",
    "ControlledEdt0l",
    "Dfa",
    "Dt0lSystem",
    "Dtf0lSystem",
    "Edt0lSystem",
    "FiniteGroup",
    "FiniteRelators",
    "FiniteTarget",
    "FormatError",
    "GroupEndomorphism",
    "Halted",
    "HallElement",
    "Hdt0lSystem",
    "LPresentation",
    "MachineList",
    "MarkedPresentation",
    "MonoidMorphism",
    "NilpotentClass",
    "NontrivialUpToBudget",
    "NotCentralPower",
    "PcPresentation",
    "PumpingDecomposition",
    "Running",
    "StabilizedQuotient",
    "Trivial",
    "TuringMachine",
    "abelianization",
    "central_f_coordinates",
    "central_word",
    "cf_shrink_step",
    "cfg_contains",
    "commutator",
    "consistency_check",
    "dtf0l_fin_to_edt0l",
    "edt0l_nilpotent_quotient",
    "edt0l_to_hdt0l",
    "edt0l_to_lpresentation",
    "eliminate_control",
    "enumerate_words",
    "finite_quotient_test",
    "free_nilpotent_wp",
    "free_reduce",
    "gamma_probe",
    "group_pow",
    "group_substitution",
    "h_center_wp",
    "h_wp",
    "hall_commutator",
    "hall_from_word",
    "hall_inv",
    "hall_mul",
    "hall_pow",
    "hdt0l_to_edt0l",
    "hirsch_length",
    "in_lower_central",
    "inverse_closure",
    "invert",
    "layer_ranks",
    "left_normed_commutator",
    "letter_tracking_dfa",
    "lpresentation_to_dtf0l_fin",
    "marked_quotient_edt0l_nilpotent",
    "marked_quotient_nilpotent",
    "matrix_model",
    "matrix_of_element",
    "nilpotent_quotient",
    "parse_group_word",
    "parse_monoid_word",
    "pc_wp",
    "pi1_edt0l",
    "pi2_edt0l",
    "product",
    "pumping_constant",
    "pumping_decompose",
    "relators",
    "run_tm",
    "stabilize_nonterminals",
    "tietze_eliminate",
    "truncated_presentation",
    "verify_f_k",
]
