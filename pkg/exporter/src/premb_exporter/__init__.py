"""Exporter of token-level contextual embeddings for mention pairs.

Reads a coreference corpus (JSON line-records), builds the concatenated
sentence-pair sequence for each requested mention pair, runs a
pretrained encoder, pools subword vectors back onto corpus tokens by
element-wise summation, and writes the result as a PREMB file that the
consuming toolkit's file-backed encoder can read.
"""

from .corpusio import CorpusIndex, read_corpus
from .encoders import ExportError, HashEncoder, HuggingFaceEncoder, load_encoder
from .export import ExportJob, run_export
from .pairs import auto_pairs, read_pairs
from .premb import write_premb
from .sequence import PairSeq, build_pair_seq

__version__ = "0.1.0"
