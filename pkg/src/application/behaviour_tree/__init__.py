# Behaviour-tree engine and the simulated leaves of the pick-and-place task
