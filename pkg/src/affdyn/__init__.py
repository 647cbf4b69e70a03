"""Hypercyclicity analysis for abelian semigroups of affine maps on C^n."""
from affdyn.affine import (
    AffineMap,
    Kind,
    LiftedMatrix,
    block_exp,
    block_log,
    compose,
    phi,
    phi_inv,
    psi,
    psi_inv,
    psi_normalize,
)
from affdyn.construct import construct_example
from affdyn.density import (
    DensityVerdict,
    count_bound,
    find_integer_relation,
    group_rank_density,
)
from affdyn.generators import (
    GeneratorSet,
    g_v0_generators,
    log_lift_generators,
    q_w0_generators,
)
from affdyn.normal_form import (
    BlockStructure,
    CanonicalVectors,
    canonical_vectors,
    compute_normal_form,
    validate_block_shape,
)
from affdyn.orbits import CoverageReport, OrbitSample, coverage_report, k_fold_orbit, simulate_orbit
from affdyn.pipeline import AnalysisReport, RefutationReport, analyze_hypercyclicity, refute_k_transitivity
from affdyn.specfile import SemigroupSpec, load_spec

__version__ = "0.1.0"
