"""Range minimum queries with block-based sparse tables."""

from .bbst import BbstIndex, bbst_build, bbst_query, bbst_space_bits, bbst_try_query
from .bbst2 import Bbst2Index, bbst2_build, bbst2_query, bbst2_space_bits, bbst2_try_query
from .compact import (
    CompactIndex,
    QuantizedMinima,
    cbbst_build,
    cbbst_space_bits,
    cbbst_try_query,
    delta_resolve,
    quantize,
)
from .core import (
    ParameterError,
    Query,
    QueryBatch,
    RangeError,
    SpaceReport,
    generate_array,
    generate_queries,
    rmq_scan,
    validate_answer,
)
from .hybrid import HybridIndex, RmqBackend, hybrid_build, hybrid_query, success_rate
from .offline import answer_batch_con, answer_batch_plain, contract, sort_endpoints
from .sparse_table import SparseTable, SparseTableBackend, st_build, st_query, st_space_bits

__version__ = "0.1.0"
