"""Gambling contract and address detection on Ethereum."""
from .boosting import BoostedEnsemble, TrainingConfig, feature_importance, train
from .contract_features import FeatureSchema, default_schema, featurize_contract
from .correction import apply_correction, build_association
from .dataset_io import LabeledDataset, load_addresses, load_contracts, load_transactions, read_dataset, write_dataset
from .evm_disasm import disassemble, opcode_table
from .memory import MemoryConfig, ReplayMemory, train_with_memory
from .metrics import MetricsReport, evaluate
from .tx_graph import build_graph, graph_features

__all__ = [
    "BoostedEnsemble", "FeatureSchema", "LabeledDataset", "MemoryConfig", "MetricsReport", "ReplayMemory",
    "TrainingConfig", "apply_correction", "build_association", "build_graph", "default_schema", "disassemble",
    "evaluate", "feature_importance", "featurize_contract", "graph_features", "load_addresses",
    "load_contracts", "load_transactions", "opcode_table", "read_dataset", "train", "train_with_memory",
    "write_dataset",
]
__version__ = "0.1.0"
