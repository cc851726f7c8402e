from ..tensor import as_tensor, ops

def _squared_distance(scores, target):
  diff = ops.sub(as_tensor(scores), target)
  return ops.mean(ops.mul(diff, diff))

def generator_adversarial_loss(d_fake):
  return _squared_distance(d_fake, 1.0)

def discriminator_adversarial_loss(d_fake, d_real, standard=True):
  """
  Least squares with fake scores pushed to 0 and real ones to 1.
  `standard=False` targets 1 for both terms.
  """
  fake_target = 0.0 if standard else 1.0
  return ops.add(_squared_distance(d_fake, fake_target), _squared_distance(d_real, 1.0))

def lsgan_losses(d_fake, d_real, standard=True):
  return generator_adversarial_loss(d_fake), discriminator_adversarial_loss(d_fake, d_real, standard)
