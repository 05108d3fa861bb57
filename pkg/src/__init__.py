"""seesawtrack - decentralized multi-target tracking by steering agents."""
