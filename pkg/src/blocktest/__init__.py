"""Query-efficient property testers for Boolean function classes.

Each class tester (k-juntas, Fourier degree, sparse F2 polynomials) is
built on a relevant-block verifier plus a majority-vote self-corrector.
Exact enumeration oracles back every statistical claim at desk scale.
"""

from .bits import CapabilityError, UsageError, splice
from .block_verifier import BlockCertificate, BlockPartition, collapse_oracle, rb_presets, rb_verify, test_literal
from .functions import (
    FourierExpansion,
    Junta,
    SparsePoly,
    Term,
    TermFunction,
    TruthTable,
    distance_to_class,
    exact_distance,
    influence,
)
from .learners import anf_exact_learn, fourier_exact_learn, fourier_membership, learn_then_test
from .oracle import FunctionOracle, QueryOracle, restrict
from .rc_verifier import (
    ApproxLearner,
    ExactLearner,
    RcCertificate,
    binary_search_witness,
    rc_verify_from_approx_learner,
    rc_verify_from_exact_learner,
    rc_verify_junta,
    rc_verify_mu,
    rc_verify_sterm,
)
from .reduction import ReductionMap, apply_rp, make_rp, reduced_tester
from .sampling import chernoff_sample_size, distinguish, estimate, span_points
from .self_correct import CorrectionParams, self_correct
from .testers import (
    TesterConfig,
    generic_block_tester,
    test_fourier_degree,
    test_k_junta,
    test_sparse_poly,
    test_sparse_poly_deg,
    theorem_tester,
)
from .verdict import ACCEPT, REJECT, Verdict

__version__ = "0.1.0"
