"""Explicit bi-Lipschitz embeddings of Heisenberg-group submanifolds and a
numerical certification harness for their distortion, horizontality, and
porosity claims."""

from .core import (Cone, SampledCurve, cone_contains, d_h, d_k, dilate,
                   group_inv, group_mul, horizontality_residual, hpoint,
                   left_translate, rotate_z, similarity)
from .snowflake import (SnowflakeCurve, build_snowflake_circle,
                        build_snowflake_line, measure_holder_distortion)
from .affine import (LineSpec, PlaneSpec, classify_line, embed_line,
                     embed_plane, embed_simplex, graph_plane, vertical_plane)
from .foliation import (FoliationChart, GraphSurface, ImplicitSurface,
                        build_chart, decompose_curve, embed_regular_chart,
                        embed_vertical_arc, horizontal_direction,
                        plane_surface, torus_surface)
from .surfaces import (RevolutionSpec, build_euclidean_sphere,
                       build_koranyi_sphere, build_revolution_chart,
                       embed_revolution, embed_saddle_family, embed_sphere,
                       revolution_preset)
from .laakso import (HeisEmbedding, LaaksoStructure, build_laakso,
                     embed_laakso, measure_graph_distortion, minimal_m,
                     porosity_witness, sdp_min_distortion)
from .harness import (DistortionReport, PairSample, distortion_report,
                      report_to_json, sample_scale_pairs)

__version__ = "0.1.0"
