"""Off-policy evaluation of deterministic policies with kernel IS and learned metrics."""
