"""Fixed word lists for the synthetic corpus generator.

Shipping the vocabulary with the package keeps generated corpora
reproducible across machines: the generator never consults system
dictionaries or locale data.

``FILLER_WORDS`` supplies ordinary sentence filler; ``CONTENT_WORDS``
supplies the words that multiword definitions are built from.  Content
words are all lowercase, purely alphabetic, and at least four characters
long so that a non-initial character can always be drawn from them.
"""

FILLER_WORDS = (
    "the", "a", "an", "of", "in", "on", "for", "with", "and", "or",
    "to", "from", "by", "as", "at", "is", "are", "was", "were", "be",
    "been", "this", "that", "these", "those", "it", "its", "we", "our",
    "they", "their", "which", "where", "when", "while", "than", "then",
    "also", "only", "both", "each", "more", "most", "some", "such",
    "other", "same", "very", "well", "still", "often", "usually",
    "results", "result", "method", "methods", "approach", "approaches",
    "study", "studies", "paper", "papers", "work", "works", "task",
    "tasks", "problem", "problems", "case", "cases", "example",
    "examples", "section", "table", "figure", "show", "shows", "shown",
    "propose", "proposed", "present", "presented", "describe",
    "described", "report", "reported", "evaluate", "evaluated",
    "compare", "compared", "improve", "improved", "obtain", "obtained",
    "achieve", "achieved", "use", "used", "using", "apply", "applied",
    "based", "given", "known", "novel", "recent", "previous", "existing",
    "several", "various", "different", "further", "better", "best",
    "large", "small", "first", "second", "new", "main", "key", "common",
)

CONTENT_WORDS = (
    "adaptive", "adversarial", "aggregation", "alignment", "analysis",
    "anchor", "annotation", "attention", "automatic", "backward",
    "baseline", "batch", "bayesian", "binary", "boosting", "boundary",
    "category", "causal", "classification", "clustering", "compression",
    "computation", "conditional", "convolution", "corpus", "decision",
    "decoding", "descent", "detection", "discriminative", "distributed",
    "document", "dynamic", "embedding", "encoder", "entropy",
    "estimation", "expansion", "extraction", "factorization", "feature",
    "forest", "forward", "function", "fusion", "generative", "gradient",
    "graph", "hierarchical", "hybrid", "identification", "inference",
    "information", "iterative", "kernel", "labeling", "language",
    "latent", "learning", "lexical", "linear", "machine", "margin",
    "markov", "matrix", "memory", "minimal", "mixture", "modeling",
    "momentum", "network", "neural", "normalization", "objective",
    "optimization", "parsing", "partition", "pattern", "policy",
    "pooling", "prediction", "probabilistic", "projection", "pruning",
    "random", "ranking", "recognition", "recurrent", "reduction",
    "regression", "regularization", "representation", "residual",
    "retrieval", "robust", "sampling", "segmentation", "selection",
    "semantic", "sequence", "signal", "sparse", "spectral", "stochastic",
    "structure", "supervised", "symbolic", "syntactic", "temporal",
    "tensor", "training", "transfer", "transformer", "translation",
    "unsupervised", "variational", "vector", "weighted",
)
