# Gateways package
# A gateway reads an external resource (model files, tree files) or wraps an
# external capability (the QP solver) behind a port owned by the application
# layer, and hands the use cases ready-to-consume domain entities.
