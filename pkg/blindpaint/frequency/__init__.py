from .dct import FrequencySpectrum, HighPassConfig, dct2, idct2, dct2_reference, high_pass, cosine_basis
from .fad import luma, frequency_representation, frequency_batch
