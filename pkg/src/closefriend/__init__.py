"""Friendship-closeness analytics over directed social graphs.

Pipeline: ingest a weighted directed graph, split each target's sources into
candidate groups, score every (source, target) pair with individual- and
group-level closeness measures, learn adoption behavior with boosted trees,
and recommend top-k targets — plus a seeded simulator and an analysis module
for closed-loop evaluation.
"""

from .analysis import (ConversionCurve, LevelBinning, RepetitionResult,
                       conversion_curve, discretize, write_report)
from .boosting import (PredictionReport, TreeEnsemble, auc_score, evaluate,
                       feature_importance, group_inclination, logistic_loss,
                       predict, train)
from .config import Manifest, RunConfig, substream
from .embedding import (EmbeddingTable, SimilarityProvider, WalkConfig,
                        export_embeddings, generate_walks, import_embeddings,
                        train_embeddings, walk_step_distribution, write_walks)
from .errors import (CloseFriendError, ConfigError, GraphParseError,
                     GraphValidationError, LookupError_, ParameterError,
                     StateError, TrainingError)
from .graph import (EgoNetwork, Graph, apply_weight_policy, build_graph,
                    graph_from_edges, load_graph)
from .groups import (CandidateGroup, GroupAssignment, categorize_target,
                     dump_groups, weakly_connected_components)
from .measures import (FEATURE_SETS, MEASURE_NAMES, SIT_FEATURES,
                       MeasureConfig, MeasureRecord, common_neighbors,
                       compute_all, compute_feature_table, group_density,
                       igt, inclusiveness, multi_membership, pair_weight,
                       read_feature_file, select_features, tie_strength, ugt,
                       user_group_tie, write_feature_file, write_records)
from .pagerank import (PageRankVector, group_pagerank,
                       group_personalized_pagerank, pagerank,
                       personalized_pagerank)
from .ranking import (E2EReport, FeedWindow, e2e_rate, rank_candidates,
                      recommend_all, recommend_topk, write_recommendations)
from .simulate import (BehaviorModel, EventOutcome, GeneratorConfig,
                       averaged_cc_size_distribution, generate_graph,
                       read_outcome, simulate_event, write_outcome)

__version__ = "0.1.0"
