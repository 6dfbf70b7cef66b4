"""Numeric core: activations, LSTM, sentence encoder, gradient checking."""

from .checkpoint import load_checkpoint, save_checkpoint
from .encoder import EncoderParams, EncoderTape, encode_sentence
from .gradcheck import GradCheckReport, grad_check
from .lstm import LstmParams, LstmState, LstmTape, lstm_forward, lstm_step
from .ops import linear, sigmoid, softmax, tanh_act

__all__ = [
    "EncoderParams", "EncoderTape", "GradCheckReport", "LstmParams", "LstmState",
    "LstmTape", "encode_sentence", "grad_check", "linear", "load_checkpoint",
    "lstm_forward", "lstm_step", "save_checkpoint", "sigmoid", "softmax", "tanh_act",
]
