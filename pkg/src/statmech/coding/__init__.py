"""Information-theoretic half of the toolbox: random-code phase diagram and
error exponents, rate-distortion, hierarchical codes and joint
source-channel coding."""
