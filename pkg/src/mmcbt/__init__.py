"""Cross-domain rating prediction via codebook latent-factor transfer.

A dense source rating matrix is co-clustered into a cluster-level codebook,
the codebook is pruned and factorized with ordinal max-margin matrix
factorization, and the resulting latent factors are transferred to a sparse
target domain by learning soft cluster-membership weights under a hinge
loss. Includes single-domain max-margin factorization and direct codebook
expansion as baselines, plus an experiment CLI.
"""

from .baselines import CbtModel, cbt_fit, cbt_loss, cbt_predict, round_ratings
from .coclustering import (Codebook, CoclusterConfig, Memberships,
                           PartialCodebook, build_codebook, cocluster,
                           partial_codebook_ratings, prune_codebook)
from .errors import DataError, DivergenceError
from .metrics import mae, rmse
from .mmmf import (MmmfModel, SolverConfig, decode_rating, decode_scores,
                   mmmf_fit, mmmf_gradients, mmmf_objective, ordinal_sign,
                   smooth_hinge, smooth_hinge_grad)
from .pipeline import (ExperimentConfig, ExperimentReport, report_csv,
                       run_experiment, run_pipeline, sweep, sweep_csv)
from .ratings import (RatingMatrix, SplitPair, load_goodbooks, load_movielens,
                      load_ratings, mean_fill_rows, split_train_test)
from .transfer import (TransferConfig, TransferModel, fit_transfer,
                       grad_alpha, grad_beta, l1_pen, l1_pen_grad, l2_pen,
                       l2_pen_grad, predict, predict_scores,
                       transfer_objective)

__version__ = "0.1.0"

__all__ = [
    "CbtModel", "Codebook", "CoclusterConfig", "DataError", "DivergenceError",
    "ExperimentConfig", "ExperimentReport", "Memberships", "MmmfModel",
    "PartialCodebook", "RatingMatrix", "SolverConfig", "SplitPair",
    "TransferConfig", "TransferModel", "build_codebook", "cbt_fit",
    "cbt_loss", "cbt_predict", "cocluster", "decode_rating", "decode_scores",
    "fit_transfer", "grad_alpha", "grad_beta", "l1_pen", "l1_pen_grad",
    "l2_pen", "l2_pen_grad", "load_goodbooks", "load_movielens",
    "load_ratings", "mae", "mean_fill_rows", "mmmf_fit", "mmmf_gradients",
    "mmmf_objective", "ordinal_sign", "partial_codebook_ratings", "predict",
    "predict_scores", "prune_codebook", "report_csv", "rmse", "round_ratings",
    "run_experiment", "run_pipeline", "smooth_hinge", "smooth_hinge_grad",
    "split_train_test", "sweep", "sweep_csv", "transfer_objective",
]
