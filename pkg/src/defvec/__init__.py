"""defvec: context-independent word vectors from dictionary definitions
rendered as image sequences and compressed by a convolutional autoencoder."""

from .embedding import EMBEDDING_DIM, EmbeddingTable, WordEmbedding, embed_word
from .imageset import IMAGES_PER_SET, ImageSet, blank_image
from .vocab import MAX_DEFINITION_TERMS, PAD, Vocabulary

__version__ = "0.1.0"

__all__ = [
    "EMBEDDING_DIM",
    "EmbeddingTable",
    "IMAGES_PER_SET",
    "ImageSet",
    "MAX_DEFINITION_TERMS",
    "PAD",
    "Vocabulary",
    "WordEmbedding",
    "blank_image",
    "embed_word",
]
