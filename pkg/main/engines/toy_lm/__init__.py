from .checkpoint import load_checkpoint, save_checkpoint
from .data import gen_copy_mixture, sample_copy_mixture
from .decomposition import extract_prior_decomposition, prior_argmax_hits
from .evaluation import eval_extrapolation, retention
from .gradcheck import gradient_check, seeded_gradient_check
from .model import ToyLM, attention_weights, backward, build_model, forward
from .training import TrainResult, train
