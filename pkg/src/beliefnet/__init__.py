"""Belief-function calculus and belief-network structure learning.

The package covers three layers: exact set algebra over finite frames
(:mod:`beliefnet.frames`), the mass-function operator algebra including
combination, conditioning, and conditional factors (:mod:`beliefnet.mass`),
and on top of those a population model for set-valued data
(:mod:`beliefnet.population`), belief networks with d-separation and
independence testing (:mod:`beliefnet.network`), dependence scores
(:mod:`beliefnet.dependence`), and tree/polytree structure learners
(:mod:`beliefnet.learners`).  ``beliefnet.cli`` drives it all from the
command line.
"""

from .errors import (
    BeliefNetError,
    CapacityError,
    ConflictError,
    FormatError,
    FrameError,
    GenerationError,
    GraphError,
    ImpossibleEventError,
    MassError,
    NoSolutionError,
    ScopeError,
)
from .frames import (
    ConfigSet,
    Frame,
    Scope,
    cylinder_set,
    decompose_product,
    is_product,
    product_set,
    project_set,
)
from .mass import (
    MassFunction,
    approx_equal,
    belief,
    combine,
    commonality,
    condition,
    conditional_factor,
    extend,
    l1_distance,
    marginalize,
    mass_from_commonality,
    simple_support,
    vacuous,
)
from .population import Dataset, condition_dataset, empirical_mass, read_dataset, sample_dataset, write_dataset
from .dependence import (
    ScoreContext,
    agreement,
    collider_score,
    cross_log_score,
    dependence_weight,
    pair_joint_via_background,
    relative_log_score,
)
from .network import (
    BeliefNetwork,
    Dag,
    IndependenceStatement,
    d_separated,
    independence_test,
    joint_distribution,
    random_network,
    random_polytree,
    random_tree,
    read_network,
    write_network,
)
from .learners import LearnedStructure, StructureMetrics, compare_structures, learn_polytree, learn_tree

__version__ = "0.1.0"
