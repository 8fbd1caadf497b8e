# optosqueeze - Mechanical squeezing with linear and quadratic optomechanical coupling
