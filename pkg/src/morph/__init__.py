"""Modular system configuration: outranking, morphological synthesis, aggregation."""

from .errors import MorphError
from .model import (CompatibilityMatrix, DesignAlternative, Node, SystemModel, ValidationReport,
                    build_model, compat, count_design_space, validate_model)
from .modelfile import ModelFile, load_sensor, parse_model, sensor_model_path
from .ranking import (CriterionSpec, EstimateTable, Thresholds, concordance, discordance,
                      outranking_graph, rank_group, rank_layers)
from .synthesis import (CompositeDa, CompositeSolution, QualityVector, assign_layer_priorities,
                        brute_force_synthesize, min_compatibility, pareto_front, quality_vector,
                        strictly_dominates, synthesize)
from .aggregation import (McpInstance, McpItem, McpSolution, SelectionProfile, compress_superstructure,
                          extend_kernel, kernel, mcp_exact, mcp_greedy, proximity, set_median,
                          superstructure)

__version__ = "0.1.0"
