"""
Smooth-GAN: gated-conv generator with FSE, spectral-normalized patch discriminator
"""
