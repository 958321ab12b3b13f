# Interface Adapters Layer
# This layer handles external concerns like the command line, model and tree
# files, the QP solver and artefact formatting
