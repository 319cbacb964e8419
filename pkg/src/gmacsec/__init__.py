"""Rate-equivocation regions and secrecy simulations for two-user
multiple-access channels with confidential messages."""

__version__ = "0.1.0"
