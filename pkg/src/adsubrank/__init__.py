"""Adaptive submodular ranking: a greedy policy for covering an unknown
scenario with feedback, its applications and comparison baselines."""

from .baselines import (AdStaticPolicy, ClusterModel, MLPolicy, OptResult, RandomPolicy,
                        StaticPolicy, adstatic_select, exact_opt_oracle, kmeans_cluster,
                        ml_select, ml_update, odt_greedy_select, static_rank)
from .datasets import (RatingsMatrix, SynParams, gen_syn, ingest_movielens,
                       mir_instance_from_ratings, odt_instance_from_ratings, permute_probs,
                       powerlaw_probs, random_instance)
from .exceptions import (AdsubError, ConfigError, ConstructionError, DataError, FormatError,
                         InvariantError, ParameterError, PolicyIncompleteError, SizeError,
                         UnsupportedError, UsageError)
from .formats import dump_instance, instance_from_dict, instance_to_dict, load_instance
from .functions import (CoverageUniverse, check_submodular, drd_function, eqclass_function,
                        generalized_odt_function, mir_function, odt_function, ranking_function)
from .model import AlgoState, Instance, advance_state, epsilon_of, root_state, validate_instance
from .policy import build_policy, le_split, multiway_split, score_candidates, select_next
from .trie import PolicyTrie, expected_cost, simulate

__version__ = "0.1.0"
