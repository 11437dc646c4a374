"""Window mean-payoff games under partial observation."""
