"""sumforge: extractive summarization with ROUGE, greedy oracle labels and
LSTM / BERTSum-style sentence scorers."""

__version__ = "0.1.0"
