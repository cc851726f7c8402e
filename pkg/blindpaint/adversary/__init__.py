from .spectral import SpectralState, spectral_normalize, power_iteration, largest_singular_value, SN_EPS
from .discriminator import Discriminator, DiscriminatorConfig, discriminate, receptive_field, SCHEDULE
from .lsgan import lsgan_losses, generator_adversarial_loss, discriminator_adversarial_loss
