from .bundling import Bundling, conflict_rate, efb_bundle
from .config import TrainingConfig
from .model import Booster, BoostedEnsemble, feature_importance, train
from .objective import GradientState, compute_gradients, log_loss, logistic
from .sampling import goss_sample
from .tree import BinnedData, Tree, grow_tree

__all__ = [
    "Booster", "BoostedEnsemble", "BinnedData", "Bundling", "GradientState", "Tree",
    "TrainingConfig", "compute_gradients", "conflict_rate", "efb_bundle",
    "feature_importance", "goss_sample", "grow_tree", "log_loss", "logistic", "train",
]
