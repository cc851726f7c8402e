from .misc import expand_path, mkdirp, default, DotDict, derive_seed, make_rng, list_files
from .arrays import to_nchw, to_nhwc, mask_channel
from .printer import printer
