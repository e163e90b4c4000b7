"""netsvm: Wireshark packet-list exports to SVM traffic classification and weekly reports.

Pipeline stages, one module each:

ingest   Wireshark CSV export -> CaptureBatch
arff     CaptureBatch -> Dataset, ARFF read/write, Remove filter
prep     Dataset -> EncodedDataset, percentage split
svm      SMO-trained binary C-SVC, one-vs-one ensemble, model files
evalkit  confusion matrix and WEKA summary statistics
report   weekly destination/protocol/Length tables
"""

__version__ = "0.1.0"

from .arff import Attribute, Dataset, from_capture, load_arff, parse_arff, remove_attributes, write_arff
from .evalkit import ConfusionMatrix, EvalSummary, confusion, format_report, summarize
from .ingest import CaptureBatch, PacketRecord, merge_batches, parse_capture_csv, read_capture_csv
from .prep import EncodedDataset, EncoderSpec, SplitSpec, encode, fit_encoder, percentage_split
from .report import LengthStats, TrafficReport, length_stats, tabulate, weekly_report
from .svm import KernelSpec, SvmOvoModel, TrainConfig, load_model, predict, save_model, train_ovo

__all__ = [
    "Attribute",
    "CaptureBatch",
    "ConfusionMatrix",
    "Dataset",
    "EncodedDataset",
    "EncoderSpec",
    "EvalSummary",
    "KernelSpec",
    "LengthStats",
    "PacketRecord",
    "SplitSpec",
    "SvmOvoModel",
    "TrafficReport",
    "TrainConfig",
    "confusion",
    "encode",
    "fit_encoder",
    "format_report",
    "from_capture",
    "length_stats",
    "load_arff",
    "load_model",
    "merge_batches",
    "parse_arff",
    "parse_capture_csv",
    "percentage_split",
    "predict",
    "read_capture_csv",
    "remove_attributes",
    "save_model",
    "summarize",
    "tabulate",
    "train_ovo",
    "weekly_report",
    "write_arff",
]
