"""madplan: robust closed-loop planning over mixed normal/adversarial diffusion predictions."""

__version__ = "0.1.0"
