from .base import TrainedModel, classify, load_model, predict_proba, save_model
from .bilstm import (
    BiLstmConfig,
    bilstm_forward,
    bilstm_loss_and_grads,
    bilstm_predict_proba,
    fit_bilstm,
    init_bilstm_params,
)
from .gradient import (
    GradientModelConfig,
    fit_gradient_model,
    gradient_predict_proba,
    init_gradient_params,
    logistic_loss_and_grads,
    mlp_loss_and_grads,
)
from .naive_bayes import fit_naive_bayes, nb_predict_proba, predict_naive_bayes

__all__ = [
    "TrainedModel",
    "classify",
    "load_model",
    "predict_proba",
    "save_model",
    "BiLstmConfig",
    "bilstm_forward",
    "bilstm_loss_and_grads",
    "bilstm_predict_proba",
    "fit_bilstm",
    "init_bilstm_params",
    "GradientModelConfig",
    "fit_gradient_model",
    "gradient_predict_proba",
    "init_gradient_params",
    "logistic_loss_and_grads",
    "mlp_loss_and_grads",
    "fit_naive_bayes",
    "nb_predict_proba",
    "predict_naive_bayes",
]
