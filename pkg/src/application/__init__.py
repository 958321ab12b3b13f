# Application Business Rules Layer
# This layer contains use cases, ports and the behaviour-tree engine that
# orchestrate the domain. Import use cases from their modules.
